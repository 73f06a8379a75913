#include <cmath>

#include <doctest.h>

#include <legdesign/evolution.hpp>
#include <legdesign/simulator.hpp>

using namespace legdesign;

namespace {

    // A morphology the built-in evaluator runs to completion.
    MorphologyGenome walker()
    {
        RunConfig cfg = RunConfig::desk();
        cfg.scheme = Scheme::Static;
        for (std::uint64_t s = 0;; s++) {
            Rng rng(s);
            const MorphologyGenome g = random_morphology(rng);
            if (evaluate(g, default_controller(), cfg, 0).feasible())
                return g;
        }
    }

} // namespace

TEST_CASE("joint at rest on target stays put")
{
    const JointStep s = step_joint({0.3, 0.0}, 0.3, 4000, 20, 100, 1.2, 2.0, 1.0 / 30.0);
    CHECK(s.torque == 0.0);
    CHECK(s.power == 0.0);
    CHECK(s.state.angle == 0.3);
    CHECK(s.state.velocity == 0.0);
}

TEST_CASE("joint torque saturates")
{
    const JointStep s = step_joint({0.0, 0.0}, 2.0, 6000, 20, 150, 1.5, 3.0, 1.0 / 30.0);
    CHECK(s.torque == 150.0);
    const JointStep n = step_joint({0.0, 0.0}, -2.0, 6000, 20, 150, 1.5, 3.0, 1.0 / 30.0);
    CHECK(n.torque == -150.0);
}

TEST_CASE("joint update by hand")
{
    const double dt = 1.0 / 30.0;
    const JointStep s = step_joint({0.0, 0.0}, 0.1, 2000, 10, 200, 1.5, 1.0, dt);
    CHECK(s.torque == doctest::Approx(200.0).epsilon(1e-12));
    CHECK(s.state.velocity == doctest::Approx(std::min(200.0 * dt, 1.5)));
    CHECK(s.state.angle == doctest::Approx(1.5 * dt));
    CHECK(s.power == doctest::Approx(200.0 * 1.5));

    const JointStep slow = step_joint({0.0, 0.0}, 0.1, 2000, 10, 200, 100.0, 1.0, dt);
    CHECK(slow.state.velocity == doctest::Approx(200.0 * dt));
}

TEST_CASE("effective inertia")
{
    LegInstance leg;
    for (auto& l : leg.links)
        l.length = 0.5;
    CHECK(effective_inertia(leg, 0) == kMinInertia);

    // One distal 1 kg point at 1 m from joint 1.
    leg.links[1].tube_mass = 0.3;
    leg.links[2].mass = 1.0;
    CHECK(effective_inertia(leg, 1) == doctest::Approx(1.0 + 0.3 * 0.25 / 3.0));

    // Brute force over a random leg.
    Rng rng(11);
    const RobotModel m = expand(random_morphology(rng));
    const LegInstance& r = m.legs[0];
    for (int j = 0; j < kLinksPerLeg; j++) {
        double sum = r.links[j].mechanism_mass * std::pow(r.links[j].length, 2) + r.links[j].tube_mass * std::pow(r.links[j].length, 2) / 3.0;
        for (int d = j + 1; d < kLinksPerLeg; d++) {
            double reach = 0.0;
            for (int k = j; k <= d; k++)
                reach += r.links[k].length;
            sum += r.links[d].mass * reach * reach;
        }
        CHECK(effective_inertia(r, j) == doctest::Approx(std::max(sum, kMinInertia)).epsilon(1e-12));
    }
}

TEST_CASE("a robot without joint speed does not move")
{
    MorphologyGenome g = walker();
    for (auto& l : g.links)
        l.max_ang_vel = 0.0;
    const SimResult r = simulate(expand(g), default_controller(), SimConfig{});
    CHECK(r.distance == 0.0);
    CHECK(r.energy == 0.0);
}

TEST_CASE("overlapping legs terminate at the first step")
{
    RobotModel m = expand(walker());
    for (auto& leg : m.legs)
        leg.attach_position = m.legs[0].attach_position.cwiseProduct(Eigen::Vector3d(1, 1, leg.side == Side::Left ? -1 : 1));
    const SimResult r = simulate(m, default_controller(), SimConfig{});
    CHECK(r.terminated == Termination::SelfIntersection);
    CHECK(r.duration_run == 0.0);
    CHECK(r.steps == 0);
}

TEST_CASE("energy and distance replay from the log")
{
    const RobotModel m = expand(walker());
    SimConfig cfg;
    cfg.record_log = true;
    const SimResult r = simulate(m, default_controller(), cfg);
    REQUIRE(r.terminated == Termination::None);
    REQUIRE(static_cast<int>(r.log.size()) == cfg.steps());

    double e = 0.0;
    for (const auto& row : r.log)
        for (double p : row.powers)
            e += p * cfg.dt;
    CHECK(e == doctest::Approx(r.energy).epsilon(1e-9));
    CHECK(r.log.back().energy == r.energy);
    CHECK(r.log.back().distance == r.distance);
    CHECK(cost_of_transport(r, m.total_mass, cfg.gravity)
        == doctest::Approx(e / (m.total_mass * cfg.gravity * r.distance)).epsilon(1e-9));
}

TEST_CASE("logged joint motion respects speed and torque limits")
{
    const RobotModel m = expand(walker());
    SimConfig cfg;
    cfg.record_log = true;
    const SimResult r = simulate(m, default_controller(), cfg);
    for (std::size_t i = 0; i < r.log.size(); i++) {
        for (std::size_t j = 0; j < r.log[i].torques.size(); j++) {
            const auto& joint = m.legs[j / kLinksPerLeg].links[j % kLinksPerLeg].joint;
            REQUIRE(std::abs(r.log[i].torques[j]) <= joint.max_torque);
            if (i > 0)
                REQUIRE(std::abs(r.log[i].angles[j] - r.log[i - 1].angles[j]) <= joint.max_ang_vel * cfg.dt + 1e-12);
        }
    }
}

TEST_CASE("simulation is deterministic and splits cleanly")
{
    const RobotModel m = expand(walker());
    const SimConfig cfg;
    const SimResult a = simulate(m, default_controller(), cfg);
    const SimResult b = simulate(m, default_controller(), cfg);
    CHECK(a.distance == b.distance);
    CHECK(a.energy == b.energy);

    Rollout split(m, default_controller(), cfg);
    split.advance(cfg.steps() / 2);
    const double half = split.result().energy;
    split.advance(cfg.steps());
    CHECK(half > 0.0);
    CHECK(split.result().energy == doctest::Approx(a.energy).epsilon(1e-9));
    CHECK(split.result().distance == doctest::Approx(a.distance).epsilon(1e-9));
}

TEST_CASE("adjacent parts touching do not end the run")
{
    const RobotModel m = expand(walker());
    const SimResult r = simulate(m, default_controller(), SimConfig{});
    CHECK(r.terminated == Termination::None);
    // Consecutive links share a joint, so their centre-lines meet.
    const LegPoints p = leg_points(m.legs[0], {0.5, 0.5, 0.5});
    CHECK(segment_distance(p[0], p[1], p[1], p[2]) == 0.0);
    CHECK(segment_distance(p[1], p[2], p[2], p[3]) == 0.0);
}

TEST_CASE("segment distance")
{
    using V = Eigen::Vector3d;
    CHECK(segment_distance(V(0, 0, 0), V(1, 0, 0), V(0, 1, 0), V(1, 1, 0)) == doctest::Approx(1.0));
    CHECK(segment_distance(V(0, 0, 0), V(1, 0, 0), V(0.5, -1, 1), V(0.5, 1, 1)) == doctest::Approx(1.0));
    CHECK(segment_distance(V(0, 0, 0), V(1, 0, 0), V(2, 0, 0), V(3, 0, 0)) == doctest::Approx(1.0));
    CHECK(segment_box_distance(V(2, -1, 0), V(2, 1, 0), V(1, 1, 1)) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(segment_box_distance(V(-2, 0, 0), V(2, 0, 0), V(1, 1, 1)) == doctest::Approx(0.0));
}

TEST_CASE("cost of transport and fitness")
{
    SimResult r;
    r.energy = 2943.0;
    r.distance = 5.0;
    CHECK(cost_of_transport(r, 60.0, 9.81) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fitness(r, 60.0, 9.81) == doctest::Approx(1.0).epsilon(1e-12));
    r.energy = 0.0;
    CHECK(cost_of_transport(r, 60.0, 9.81) == 0.0);
    r.energy = 2943.0;
    r.distance = 0.0;
    CHECK(std::isinf(cost_of_transport(r, 60.0, 9.81)));
    CHECK(fitness(r, 60.0, 9.81) == 0.0);
    r.distance = -1.0;
    CHECK(fitness(r, 60.0, 9.81) == 0.0);
    r.energy = 0.0052 * 60.0 * 9.81 * 5.0;
    r.distance = 5.0;
    CHECK(fitness(r, 60.0, 9.81) == doctest::Approx(192.3).epsilon(1e-3));
}
