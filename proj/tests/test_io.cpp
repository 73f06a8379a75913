#include <sstream>

#include <doctest.h>

#include <legdesign/io.hpp>

using namespace legdesign;

namespace {

    Archive small_archive()
    {
        RunConfig cfg = RunConfig::desk();
        cfg.scheme = Scheme::Genome;
        cfg.init_population = 10;
        cfg.offspring_per_generation = 6;
        cfg.generations = 3;
        return run(cfg).archive;
    }

} // namespace

TEST_CASE("genomes round-trip through JSON")
{
    Rng rng(41);
    for (int i = 0; i < 50; i++) {
        const MorphologyGenome g = random_morphology(rng);
        const ControllerGenome c = random_controller(rng);
        CHECK(morphology_from_json(nlohmann::json::parse(to_json(g).dump())) == g);
        CHECK(controller_from_json(nlohmann::json::parse(to_json(c).dump())) == c);
    }
    const auto j = to_json(random_morphology(rng));
    CHECK(j.at("links").size() == 3);
    CHECK(j.contains("quad_strength_mult"));
}

TEST_CASE("robot model export")
{
    Rng rng(42);
    const MorphologyGenome g = random_morphology(rng);
    const RobotModel m = expand(g);
    const auto j = to_json(m);
    CHECK(j.at("legs").size() == 2 * static_cast<std::size_t>(g.legs_per_side));
    CHECK(j.at("total_mass").get<double>() == m.total_mass);
}

TEST_CASE("archive round-trips through JSONL")
{
    const Archive a = small_archive();
    REQUIRE(a.size() > 0);
    std::stringstream ss;
    write_archive_jsonl(ss, a);
    const std::string text = ss.str();
    const Archive b = read_archive_jsonl(ss);
    REQUIRE(b.size() == a.size());
    for (const auto& [key, e] : a.cells()) {
        const Elite* o = b.find(key);
        REQUIRE(o);
        CHECK(o->fitness == e.fitness);
        CHECK(o->features == e.features);
        CHECK(o->morphology == e.morphology);
        CHECK(o->controller == e.controller);
        CHECK(o->serial == e.serial);
        CHECK(o->eval_seed == e.eval_seed);
    }
    std::stringstream again;
    write_archive_jsonl(again, b);
    CHECK(again.str() == text);
}

TEST_CASE("corrupt archive lines are reported by number")
{
    const Archive a = small_archive();
    std::stringstream ss;
    write_archive_jsonl(ss, a);
    std::string first;
    std::getline(ss, first);

    std::stringstream broken(first + "\n{not json\n");
    try {
        read_archive_jsonl(broken);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line == 2);
    }

    auto j = nlohmann::json::parse(first);
    j["cell"][0] = (j["cell"][0].get<int>() + 1) % 5;
    std::stringstream wrong_key(j.dump() + "\n");
    CHECK_THROWS_AS(read_archive_jsonl(wrong_key), ParseError);

    std::stringstream dup(first + "\n" + first + "\n");
    CHECK_THROWS_AS(read_archive_jsonl(dup), ParseError);
}

TEST_CASE("metrics CSV round-trips")
{
    const std::vector<MetricsRow> rows{{0, 100, 0.01, 3.5, 2.25, 1.0 / 3.0}, {1, 130, 0.0125, 4.0, 2.5, 0.125}};
    std::stringstream ss;
    write_metrics_csv(ss, rows);
    CHECK(ss.str().rfind("# metrics v1\ngeneration,evaluations_total,coverage,best_fitness,mean_fitness,min_fitness\n", 0) == 0);
    const auto back = read_metrics_csv(ss);
    REQUIRE(back.size() == 2);
    CHECK(back[1].evaluations_total == 130);
    CHECK(back[0].min_fitness == 1.0 / 3.0);

    std::stringstream bad("# metrics v1\ngeneration,evaluations_total,coverage,best_fitness,mean_fitness,min_fitness\n1,2,x,4,5,6\n");
    try {
        read_metrics_csv(bad);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line == 3);
    }
}

TEST_CASE("config files")
{
    ConfigFile c = profile_config("desk");
    apply_config(c, nlohmann::json{{"scheme", "static"}, {"generations", 5}, {"min_height", 1.0}, {"output_dir", "x"}});
    CHECK(c.run.scheme == Scheme::Static);
    CHECK(c.run.generations == 5);
    CHECK(c.run.constraints.min_height == 1.0);
    CHECK(c.output_dir == "x");
    CHECK(c.run.init_population == 100);

    CHECK_THROWS_AS(apply_config(c, nlohmann::json{{"generatons", 5}}), ConfigError);
    CHECK_THROWS_AS(apply_config(c, nlohmann::json{{"generations", "many"}}), ConfigError);
    CHECK_THROWS_AS(apply_config(c, nlohmann::json{{"init_population", 0}}), ConfigError);
    CHECK_THROWS_AS(profile_config("huge"), ConfigError);

    // The echo re-applies to the same configuration.
    ConfigFile d = profile_config("paper");
    apply_config(d, config_to_json(c));
    CHECK(config_to_json(d) == config_to_json(c));
    CHECK(profile_config("paper").run.generations == 4000);
}
