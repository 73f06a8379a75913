#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <memory>
#include <numbers>
#include <vector>

#include <legdesign/gait.hpp>
#include <legdesign/genome.hpp>
#include <legdesign/kinematics.hpp>
#include <legdesign/phenotype.hpp>

namespace legdesign {

    struct SimConfig {
        double duration = 5.0;     // s
        double dt = 1.0 / 30.0;    // s, control / logging step
        double gravity = 9.81;     // m/s^2
        double stance_epsilon = 0.01; // m
        int substeps = 10;         // joint integration steps per control step
        double lift_phase_lead = std::numbers::pi / 2.0; // lift joints lead the swing joint by this phase
        bool record_log = false;

        int steps() const;
        bool valid() const;
    };

    struct JointState {
        double angle = 0.0;
        double velocity = 0.0;
    };

    struct JointStep {
        JointState state;
        double torque = 0.0;
        double power = 0.0;
    };

    /// One semi-implicit Euler step of a torque- and velocity-limited spring-damper joint.
    JointStep step_joint(const JointState& s, double target, double stiffness, double damping, double max_torque,
        double max_ang_vel, double inertia, double dt);

    constexpr double kMinInertia = 1e-4;

    /// Inertia seen by joint `link` with the leg straight: distal links as point
    /// masses at their tips, plus this link's own tube as a rod.
    double effective_inertia(const LegInstance& leg, int link);

    enum class Termination { None, SelfIntersection };

    struct StepRecord {
        double t = 0.0;
        std::vector<double> angles;   // per joint, leg-major
        std::vector<double> torques;  // torque at the last integration substep
        std::vector<double> powers;   // mean |torque * velocity| over the control step
        std::vector<std::uint8_t> stance;
        double distance = 0.0;        // cumulative
        double energy = 0.0;          // cumulative
    };

    struct SimResult {
        double distance = 0.0;     // m, forward
        double energy = 0.0;       // J
        double duration = 0.0;     // configured trial length, s
        double duration_run = 0.0; // s actually simulated
        double standing_height = 0.0;
        Termination terminated = Termination::None;
        int steps = 0;
        std::vector<StepRecord> log;
    };

    /// Resumable rollout; `simulate` is `Rollout(...).advance(cfg.steps())`.
    class Rollout {
    public:
        Rollout(const RobotModel& model, const ControllerGenome& controller, const SimConfig& cfg);

        /// Advances up to `steps` control steps. Returns false once the run has ended.
        bool advance(int steps);

        bool finished() const { return _finished; }
        const SimResult& result() const { return _result; }
        const std::vector<JointState>& joints() const { return _joints; }

    private:
        bool _self_intersecting() const;
        void _pose();

        const RobotModel* _model;
        SimConfig _cfg;
        GaitSpec<double> _gait;
        std::vector<double> _inertia;
        std::vector<JointState> _joints;
        std::vector<LegPoints> _points;
        int _step = 0;
        bool _finished = false;
        SimResult _result;
    };

    SimResult simulate(const RobotModel& model, const ControllerGenome& controller, const SimConfig& cfg);

    /// E / (m g d); +inf when the robot did not move forward.
    double cost_of_transport(const SimResult& res, double mass, double gravity);
    double fitness(const SimResult& res, double mass, double gravity);

    /// Evaluation backend. The built-in reduced-order model is the default; a
    /// full rigid-body engine can be plugged in behind the same call.
    class SimulatorBackend {
    public:
        virtual ~SimulatorBackend() = default;
        virtual SimResult simulate(const RobotModel& model, const ControllerGenome& controller, const SimConfig& cfg) const = 0;
    };

    class ReducedOrderBackend final : public SimulatorBackend {
    public:
        SimResult simulate(const RobotModel& model, const ControllerGenome& controller, const SimConfig& cfg) const override
        {
            return legdesign::simulate(model, controller, cfg);
        }
    };

    /// CSV trace: t, per-joint angle/torque/power, per-leg stance, cumulative d and E.
    void write_trace_csv(std::ostream& os, const RobotModel& model, const SimResult& res);

} // namespace legdesign
