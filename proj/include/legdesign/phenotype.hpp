#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Core>

#include <legdesign/genome.hpp>

namespace legdesign {

    struct SimResult;

    /// Empirical mass model constants (carbon-fibre tube legs, Maxon-style motors).
    struct MassModel {
        double body_fixed_mass = 7.5;    // kg, batteries and avionics
        double body_density = 170.0;     // kg/m^3
        double tube_density = 1600.0;    // kg/m^3, carbon fibre
        double mechanism_mass = 0.2;     // kg, linkages and housing per link
        double motor_power_scale = 13000.0; // W/kg^2
    };

    enum class Side : int { Right = 0, Left = 1 };

    struct JointParams {
        double strength = 0.0;    // N m / rad
        double damping = 0.0;     // N m s / rad
        double max_torque = 0.0;  // N m
        double max_ang_vel = 0.0; // rad / s
    };

    struct LinkInstance {
        double length = 0.0;
        double width = 0.0;
        Eigen::Vector3d hinge_axis = Eigen::Vector3d::UnitX(); // unit, right-side leg frame
        JointParams joint;
        double tube_mass = 0.0;
        double motor_mass = 0.0;
        double mechanism_mass = 0.0; // fixed mechanism + motor, located at the link tip
        double mass = 0.0;
    };

    struct LegInstance {
        Side side = Side::Right;
        int index_along_body = 0;
        double u = 0.0;                                            // position parameter in [-1, 1]
        Eigen::Vector3d attach_position = Eigen::Vector3d::Zero(); // body frame, m
        double attach_pitch = 0.0;
        std::array<LinkInstance, kLinksPerLeg> links{};

        double mass() const;
    };

    struct BodyInstance {
        Eigen::Vector3d extents = Eigen::Vector3d::Zero(); // half-extents
        Eigen::Vector2d com = Eigen::Vector2d::Zero();
        double mass = 0.0;
    };

    struct RobotModel {
        BodyInstance body;
        int legs_per_side = 0;
        std::vector<LegInstance> legs; // right legs rear to front, then left legs rear to front
        double tube_thickness = 0.0;
        double total_mass = 0.0;

        const LegInstance& leg(Side side, int index) const
        {
            return legs[static_cast<std::size_t>(static_cast<int>(side) * legs_per_side + index)];
        }
    };

    /// Six MAP-Elites descriptors.
    using FeatureVector = Eigen::Matrix<double, 6, 1>;

    enum Feature : int { LegLength = 0, TotalMass = 1, LegsPerSide = 2, TubeThickness = 3, LengthScale = 4, WidthScale = 5 };

    inline const std::array<std::string, 6>& feature_names()
    {
        static const std::array<std::string, 6> names{
            "leg length", "total mass", "legs per side", "tube thickness", "leg length scale", "leg width scale"};
        return names;
    }

    struct ConstraintConfig {
        double max_mass = 60.0;  // kg, inclusive
        double min_speed = 1.0;  // m/s, strict
        double min_height = 2.0; // m, inclusive
    };

    struct ConstraintReport {
        bool mass_ok = false;
        bool speed_ok = false;
        bool height_ok = false;
        double mass = 0.0;
        double speed = 0.0;
        double height = 0.0;

        bool pass() const { return mass_ok && speed_ok && height_ok; }
        std::vector<std::string> failures() const;
    };

    /// Position parameter of leg k out of L along the body, in [-1, 1].
    double leg_position(int k, int legs_per_side);

    double motor_mass(double max_torque, double max_ang_vel, const MassModel& mm = {});

    struct LinkMass {
        double tube = 0.0;
        double motor = 0.0;
        double mechanism = 0.0; // fixed part + motor
        double total = 0.0;
    };

    /// Hollow square carbon tube with outer side `width`; wall clamped to half the side.
    LinkMass link_mass(double length, double width, double tube_thickness, double max_torque, double max_ang_vel,
        const MassModel& mm = {});

    double body_mass(const Eigen::Vector3d& body_extents, const MassModel& mm = {});

    RobotModel expand(const MorphologyGenome& g, const MassModel& mm = {});

    FeatureVector features(const RobotModel& model, const MorphologyGenome& g);

    ConstraintReport check_constraints(const RobotModel& model, const SimResult& sim, const ConstraintConfig& cfg);

} // namespace legdesign
