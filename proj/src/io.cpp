#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include <legdesign/io.hpp>

namespace legdesign {

    using nlohmann::json;

    namespace {

        template <typename V>
        json vec(const V& v)
        {
            json a = json::array();
            for (Eigen::Index i = 0; i < v.size(); i++)
                a.push_back(v(i));
            return a;
        }

        template <int N>
        Eigen::Matrix<double, N, 1> vec_from(const json& j, const char* key)
        {
            const json& a = j.at(key);
            if (!a.is_array() || a.size() != static_cast<std::size_t>(N))
                throw std::invalid_argument(std::string("'") + key + "' must be an array of " + std::to_string(N) + " numbers");
            Eigen::Matrix<double, N, 1> v;
            for (int i = 0; i < N; i++)
                v(i) = a[static_cast<std::size_t>(i)].get<double>();
            return v;
        }

        template <std::size_t N>
        std::array<double, N> arr_from(const json& j, const char* key)
        {
            const json& a = j.at(key);
            if (!a.is_array() || a.size() != N)
                throw std::invalid_argument(std::string("'") + key + "' must be an array of " + std::to_string(N) + " numbers");
            std::array<double, N> out{};
            for (std::size_t i = 0; i < N; i++)
                out[i] = a[i].get<double>();
            return out;
        }

        json cell_json(const CellIndex& c)
        {
            json a = json::array();
            for (int x : c)
                a.push_back(x);
            return a;
        }

    } // namespace

    json to_json(const MorphologyGenome& g)
    {
        json links = json::array();
        for (const auto& l : g.links) {
            links.push_back({{"extents", vec(l.extents)},
                {"hinge_axis", vec(l.hinge_axis)},
                {"joint_strength", l.joint_strength},
                {"joint_damping", l.joint_damping},
                {"max_torque", l.max_torque},
                {"max_ang_vel", l.max_ang_vel}});
        }
        return {{"body_extents", vec(g.body_extents)},
            {"body_com", vec(g.body_com)},
            {"legs_per_side", g.legs_per_side},
            {"leg_attach_point", vec(g.leg_attach_point)},
            {"leg_attach_pitch", g.leg_attach_pitch},
            {"tube_thickness", g.tube_thickness},
            {"links", links},
            {"quad_attach_linear", vec(g.quad_attach_linear)},
            {"quad_attach_quadratic", vec(g.quad_attach_quadratic)},
            {"quad_length_mult", g.quad_length_mult},
            {"quad_width_mult", g.quad_width_mult},
            {"quad_strength_mult", g.quad_strength_mult}};
    }

    json to_json(const ControllerGenome& c)
    {
        return {{"stride_freq", c.stride_freq}, {"vert_offset", c.vert_offset}, {"phase_offset", c.phase_offset}};
    }

    json to_json(const Elite& e, const GridSpec& spec)
    {
        return {{"cell", cell_json(bin_index(e.features, spec))},
            {"features", vec(e.features)},
            {"fitness", e.fitness},
            {"generation_born", e.generation_born},
            {"eval_seed", e.eval_seed},
            {"serial", e.serial},
            {"morphology", to_json(e.morphology)},
            {"controller", to_json(e.controller)}};
    }

    json to_json(const RobotModel& m)
    {
        json legs = json::array();
        for (const auto& leg : m.legs) {
            json links = json::array();
            for (const auto& l : leg.links) {
                links.push_back({{"length", l.length},
                    {"width", l.width},
                    {"hinge_axis", vec(l.hinge_axis)},
                    {"strength", l.joint.strength},
                    {"damping", l.joint.damping},
                    {"max_torque", l.joint.max_torque},
                    {"max_ang_vel", l.joint.max_ang_vel},
                    {"tube_mass", l.tube_mass},
                    {"motor_mass", l.motor_mass},
                    {"mass", l.mass}});
            }
            legs.push_back({{"side", leg.side == Side::Right ? "right" : "left"},
                {"index", leg.index_along_body},
                {"u", leg.u},
                {"attach_position", vec(leg.attach_position)},
                {"attach_pitch", leg.attach_pitch},
                {"mass", leg.mass()},
                {"links", links}});
        }
        return {{"body", {{"extents", vec(m.body.extents)}, {"com", vec(m.body.com)}, {"mass", m.body.mass}}},
            {"legs_per_side", m.legs_per_side},
            {"tube_thickness", m.tube_thickness},
            {"total_mass", m.total_mass},
            {"legs", legs}};
    }

    MorphologyGenome morphology_from_json(const json& j)
    {
        MorphologyGenome g;
        g.body_extents = vec_from<3>(j, "body_extents");
        g.body_com = vec_from<2>(j, "body_com");
        g.legs_per_side = j.at("legs_per_side").get<int>();
        g.leg_attach_point = vec_from<3>(j, "leg_attach_point");
        g.leg_attach_pitch = j.at("leg_attach_pitch").get<double>();
        g.tube_thickness = j.at("tube_thickness").get<double>();
        const json& links = j.at("links");
        if (!links.is_array() || links.size() != kLinksPerLeg)
            throw std::invalid_argument("'links' must hold " + std::to_string(kLinksPerLeg) + " entries");
        for (std::size_t l = 0; l < kLinksPerLeg; l++) {
            const json& lj = links[l];
            LinkGenes& lg = g.links[l];
            lg.extents = vec_from<3>(lj, "extents");
            lg.hinge_axis = vec_from<3>(lj, "hinge_axis");
            lg.joint_strength = lj.at("joint_strength").get<double>();
            lg.joint_damping = lj.at("joint_damping").get<double>();
            lg.max_torque = lj.at("max_torque").get<double>();
            lg.max_ang_vel = lj.at("max_ang_vel").get<double>();
        }
        g.quad_attach_linear = vec_from<2>(j, "quad_attach_linear");
        g.quad_attach_quadratic = vec_from<2>(j, "quad_attach_quadratic");
        g.quad_length_mult = j.at("quad_length_mult").get<double>();
        g.quad_width_mult = j.at("quad_width_mult").get<double>();
        g.quad_strength_mult = j.at("quad_strength_mult").get<double>();
        return g;
    }

    ControllerGenome controller_from_json(const json& j)
    {
        ControllerGenome c;
        c.stride_freq = j.at("stride_freq").get<double>();
        c.vert_offset = arr_from<kLinksPerLeg>(j, "vert_offset");
        c.phase_offset = arr_from<kLinksPerLeg>(j, "phase_offset");
        return c;
    }

    Elite elite_from_json(const json& j)
    {
        Elite e;
        e.features = vec_from<6>(j, "features");
        e.fitness = j.at("fitness").get<double>();
        e.generation_born = j.at("generation_born").get<int>();
        e.eval_seed = j.at("eval_seed").get<std::uint64_t>();
        e.serial = j.value("serial", std::uint64_t{0});
        e.morphology = morphology_from_json(j.at("morphology"));
        e.controller = controller_from_json(j.at("controller"));
        return e;
    }

    void write_archive_jsonl(std::ostream& os, const Archive& a)
    {
        for (const auto& [key, e] : a.cells())
            os << to_json(e, a.spec()).dump() << '\n';
    }

    Archive read_archive_jsonl(std::istream& is, const GridSpec& spec)
    {
        Archive a(spec);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(is, line)) {
            lineno++;
            if (line.find_first_not_of(" \t\r") == std::string::npos)
                continue;
            try {
                const json j = json::parse(line);
                const Elite e = elite_from_json(j);
                const CellIndex key = bin_index(e.features, spec);
                const auto stored = j.at("cell").get<std::vector<int>>();
                if (!std::equal(stored.begin(), stored.end(), key.begin(), key.end()))
                    throw std::invalid_argument("cell key does not match features");
                if (!(e.fitness >= 0.0))
                    throw std::invalid_argument("fitness must be a non-negative number");
                a.restore(e);
            } catch (const std::exception& ex) {
                throw ParseError(ex.what(), lineno);
            }
        }
        return a;
    }

    Archive load_archive(const std::string& path, const GridSpec& spec)
    {
        std::ifstream f(path);
        if (!f)
            throw ParseError("cannot open " + path, 0);
        try {
            return read_archive_jsonl(f, spec);
        } catch (const ParseError& e) {
            throw ParseError(path + ": " + e.what(), 0);
        }
    }

    void write_metrics_csv(std::ostream& os, const std::vector<MetricsRow>& rows)
    {
        os << kMetricsHeaderComment << '\n';
        os << "generation,evaluations_total,coverage,best_fitness,mean_fitness,min_fitness\n";
        for (const auto& r : rows) {
            // Round-trip precision keeps reruns byte-identical and re-readable.
            os << r.generation << ',' << r.evaluations_total << ',' << json(r.coverage).dump() << ','
               << json(r.best_fitness).dump() << ',' << json(r.mean_fitness).dump() << ','
               << json(r.min_fitness).dump() << '\n';
        }
    }

    std::vector<MetricsRow> read_metrics_csv(std::istream& is)
    {
        std::vector<MetricsRow> rows;
        std::string line;
        std::size_t lineno = 0;
        bool header = false;
        while (std::getline(is, line)) {
            lineno++;
            if (!line.empty() && line.back() == '\r')
                line.pop_back();
            if (line.empty() || line[0] == '#')
                continue;
            if (!header) {
                if (line.rfind("generation,", 0) != 0)
                    throw ParseError("missing metrics header", lineno);
                header = true;
                continue;
            }
            std::vector<std::string> cells;
            std::stringstream ss(line);
            for (std::string c; std::getline(ss, c, ',');)
                cells.push_back(c);
            if (cells.size() != 6)
                throw ParseError("expected 6 columns, got " + std::to_string(cells.size()), lineno);
            try {
                std::size_t used = 0;
                auto num = [&](const std::string& s) {
                    const double v = std::stod(s, &used);
                    if (used != s.size())
                        throw std::invalid_argument("trailing characters in '" + s + "'");
                    return v;
                };
                MetricsRow r;
                r.generation = static_cast<int>(num(cells[0]));
                r.evaluations_total = static_cast<std::uint64_t>(num(cells[1]));
                r.coverage = num(cells[2]);
                r.best_fitness = num(cells[3]);
                r.mean_fitness = num(cells[4]);
                r.min_fitness = num(cells[5]);
                rows.push_back(r);
            } catch (const std::exception& ex) {
                throw ParseError(std::string("bad number: ") + ex.what(), lineno);
            }
        }
        if (!header)
            throw ParseError("missing metrics header", lineno);
        return rows;
    }

    std::vector<MetricsRow> load_metrics(const std::string& path)
    {
        std::ifstream f(path);
        if (!f)
            throw ParseError("cannot open " + path, 0);
        try {
            return read_metrics_csv(f);
        } catch (const ParseError& e) {
            throw ParseError(path + ": " + e.what(), 0);
        }
    }

    namespace {

        struct Field {
            std::function<json(const ConfigFile&)> get;
            std::function<void(ConfigFile&, const json&)> set;
        };

        // `access` is a generic lambda returning a reference to the member for
        // both const and mutable configs.
        template <typename T, typename Access>
        Field field(Access access)
        {
            return {[access](const ConfigFile& c) { return json(access(c)); },
                [access](ConfigFile& c, const json& j) { access(c) = j.get<T>(); }};
        }

#define LEGDESIGN_FIELD(type, expr) field<type>([](auto& c) -> auto& { return c.expr; })

        const std::vector<std::pair<std::string, Field>>& fields()
        {
            static const std::vector<std::pair<std::string, Field>> table{
                {"scheme",
                    {[](const ConfigFile& c) { return json(to_string(c.run.scheme)); },
                        [](ConfigFile& c, const json& j) { c.run.scheme = scheme_from_string(j.get<std::string>()); }}},
                {"profile", LEGDESIGN_FIELD(std::string, profile)},
                {"output_dir", LEGDESIGN_FIELD(std::string, output_dir)},
                {"init_population", LEGDESIGN_FIELD(int, run.init_population)},
                {"offspring_per_generation", LEGDESIGN_FIELD(int, run.offspring_per_generation)},
                {"generations", LEGDESIGN_FIELD(int, run.generations)},
                {"es_iterations", LEGDESIGN_FIELD(int, run.es_iterations)},
                {"master_seed", LEGDESIGN_FIELD(std::uint64_t, run.master_seed)},
                {"workers", LEGDESIGN_FIELD(int, run.workers)},
                {"regenerate_rejected_offspring", LEGDESIGN_FIELD(bool, run.regenerate_rejected_offspring)},
                {"max_init_attempts_factor", LEGDESIGN_FIELD(int, run.max_init_attempts_factor)},
                {"rate_modify_leg", LEGDESIGN_FIELD(double, run.rates.modify_leg)},
                {"rate_modify_num_legs", LEGDESIGN_FIELD(double, run.rates.modify_num_legs)},
                {"rate_modify_num_links", LEGDESIGN_FIELD(double, run.rates.modify_num_links)},
                {"rate_modify_motor", LEGDESIGN_FIELD(double, run.rates.modify_motor)},
                {"rate_modify_leg_offset", LEGDESIGN_FIELD(double, run.rates.modify_leg_offset)},
                {"rate_modify_body", LEGDESIGN_FIELD(double, run.rates.modify_body)},
                {"sim_duration", LEGDESIGN_FIELD(double, run.sim.duration)},
                {"sim_dt", LEGDESIGN_FIELD(double, run.sim.dt)},
                {"sim_gravity", LEGDESIGN_FIELD(double, run.sim.gravity)},
                {"sim_stance_epsilon", LEGDESIGN_FIELD(double, run.sim.stance_epsilon)},
                {"sim_substeps", LEGDESIGN_FIELD(int, run.sim.substeps)},
                {"sim_lift_phase_lead", LEGDESIGN_FIELD(double, run.sim.lift_phase_lead)},
                {"max_mass", LEGDESIGN_FIELD(double, run.constraints.max_mass)},
                {"min_speed", LEGDESIGN_FIELD(double, run.constraints.min_speed)},
                {"min_height", LEGDESIGN_FIELD(double, run.constraints.min_height)},
                {"mass_body_fixed", LEGDESIGN_FIELD(double, run.mass.body_fixed_mass)},
                {"mass_body_density", LEGDESIGN_FIELD(double, run.mass.body_density)},
                {"mass_tube_density", LEGDESIGN_FIELD(double, run.mass.tube_density)},
                {"mass_mechanism", LEGDESIGN_FIELD(double, run.mass.mechanism_mass)},
                {"mass_motor_power_scale", LEGDESIGN_FIELD(double, run.mass.motor_power_scale)},
            };
            return table;
        }

#undef LEGDESIGN_FIELD

    } // namespace

    ConfigFile profile_config(const std::string& profile)
    {
        ConfigFile c;
        c.profile = profile;
        if (profile == "desk")
            c.run = RunConfig::desk();
        else if (profile == "paper")
            c.run = RunConfig::paper();
        else
            throw ConfigError("unknown profile '" + profile + "' (expected desk or paper)");
        return c;
    }

    void apply_config(ConfigFile& base, const json& j)
    {
        if (!j.is_object())
            throw ConfigError("config must be a JSON object");
        // Applied to a copy so a rejected config leaves `base` untouched.
        ConfigFile next = base;
        for (const auto& [key, value] : j.items()) {
            const auto& table = fields();
            auto it = std::find_if(table.begin(), table.end(), [&](const auto& f) { return f.first == key; });
            if (it == table.end())
                throw ConfigError("unknown config key '" + key + "'");
            try {
                it->second.set(next, value);
            } catch (const std::exception& ex) {
                throw ConfigError("config key '" + key + "': " + ex.what());
            }
        }
        if (!next.run.valid())
            throw ConfigError("config values out of range");
        base = std::move(next);
    }

    json config_to_json(const ConfigFile& c)
    {
        json j = json::object();
        for (const auto& [key, f] : fields())
            j[key] = f.get(c);
        return j;
    }

} // namespace legdesign
