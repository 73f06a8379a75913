#pragma once

#include <array>
#include <numbers>
#include <vector>

#include <Eigen/Core>

#include <legdesign/rng.hpp>

namespace legdesign {

    struct ParamRange {
        double lo = 0.0;
        double hi = 0.0;

        double span() const { return hi - lo; }
        double mid() const { return 0.5 * (lo + hi); }
        double clamp(double x) const { return x < lo ? lo : (x > hi ? hi : x); }
        bool contains(double x) const { return x >= lo && x <= hi; }
    };

    struct IntRange {
        int lo = 0;
        int hi = 0;

        int clamp(int x) const { return x < lo ? lo : (x > hi ? hi : x); }
        bool contains(int x) const { return x >= lo && x <= hi; }
    };

    constexpr int kLinksPerLeg = 3;

    /// Genes for one link of the leg template.
    ///
    /// `extents` are half-extents in the link frame: component 0 runs along the
    /// link (the tube axis), components 1 and 2 span the cross-section.
    struct LinkGenes {
        Eigen::Vector3d extents = Eigen::Vector3d::Zero();
        Eigen::Vector3d hinge_axis = Eigen::Vector3d::UnitX();
        double joint_strength = 0.0; // N m / rad
        double joint_damping = 0.0;  // N m s / rad
        double max_torque = 0.0;     // N m
        double max_ang_vel = 0.0;    // rad / s

        bool operator==(const LinkGenes&) const = default;
    };

    /// Compact symmetric body and leg encoding. One leg template is mirrored to
    /// both sides and repeated `legs_per_side` times with quadratic variation.
    struct MorphologyGenome {
        Eigen::Vector3d body_extents = Eigen::Vector3d::Zero(); // (forward, up, right) half-extents, m
        Eigen::Vector2d body_com = Eigen::Vector2d::Zero();     // (forward, right), m
        int legs_per_side = 2;

        Eigen::Vector3d leg_attach_point = Eigen::Vector3d::Zero(); // body-fraction offsets
        double leg_attach_pitch = 0.0;                              // rad
        double tube_thickness = 0.0;                                // m

        std::array<LinkGenes, kLinksPerLeg> links{};

        Eigen::Vector2d quad_attach_linear = Eigen::Vector2d::Zero();
        Eigen::Vector2d quad_attach_quadratic = Eigen::Vector2d::Zero();
        double quad_length_mult = 0.0;
        double quad_width_mult = 0.0;
        double quad_strength_mult = 0.0;

        bool operator==(const MorphologyGenome&) const = default;
    };

    struct ControllerGenome {
        double stride_freq = 0.0;                     // rad / s
        std::array<double, kLinksPerLeg> vert_offset{};  // rad
        std::array<double, kLinksPerLeg> phase_offset{}; // rad

        bool operator==(const ControllerGenome&) const = default;
    };

    struct MutationRates {
        double modify_leg = 0.25;
        double modify_num_legs = 0.25;
        double modify_num_links = 0.4;
        double modify_motor = 0.25;
        double modify_leg_offset = 0.25;
        double modify_body = 0.25;

        static MutationRates none() { return {0.0, 0.0, 0.0, 0.0, 0.0, 0.0}; }
        bool valid() const;
    };

    /// Legal parameter ranges for both genomes.
    namespace ranges {
        inline constexpr std::array<ParamRange, 3> body_extents{{{0.4, 1.0}, {0.025, 0.15}, {0.05, 0.3}}};
        inline constexpr std::array<ParamRange, 2> body_com{{{-0.5, 0.5}, {-0.5, 0.5}}};
        inline constexpr IntRange legs_per_side{2, 6};
        // Only the vertical component is free; forward and lateral are pinned at 0.
        inline constexpr std::array<ParamRange, 3> leg_attach_point{{{0.0, 0.0}, {-1.0, 1.0}, {0.0, 0.0}}};
        inline constexpr ParamRange leg_attach_pitch{-0.6, 0.6};
        inline constexpr ParamRange tube_thickness{0.001, 0.01};
        inline constexpr std::array<ParamRange, 3> link_extents{{{0.3, 0.5}, {0.0025, 0.1}, {0.0025, 0.1}}};
        inline constexpr std::array<ParamRange, 3> hinge_axis{{{0.8, 1.0}, {-0.2, 0.2}, {-0.2, 0.2}}};
        inline constexpr std::array<ParamRange, 3> top_hinge_axis{{{-0.2, 0.2}, {0.8, 1.0}, {-0.2, 0.2}}};
        inline constexpr ParamRange joint_strength{2000.0, 6000.0};
        inline constexpr ParamRange joint_damping{1.0, 40.0};
        inline constexpr ParamRange max_torque{50.0, 200.0};
        inline constexpr ParamRange max_ang_vel{0.0, 1.5};
        inline constexpr std::array<ParamRange, 2> quad_attach_linear{{{0.7, 1.0}, {-0.2, 0.2}}};
        inline constexpr std::array<ParamRange, 2> quad_attach_quadratic{{{-0.1, 0.1}, {-0.1, 0.1}}};
        inline constexpr ParamRange quad_length_mult{-0.2, 0.2};
        inline constexpr ParamRange quad_width_mult{-0.2, 0.2};
        inline constexpr ParamRange quad_strength_mult{-5.0, 5.0};

        inline constexpr ParamRange stride_freq{1.0, 4.0};
        inline constexpr ParamRange vert_offset{-1.0, 2.0};
        inline constexpr ParamRange phase_offset{-std::numbers::pi / 2.0, std::numbers::pi / 2.0};

        inline const std::array<ParamRange, 3>& hinge_axis_for(int link)
        {
            return link == 0 ? top_hinge_axis : hinge_axis;
        }
    } // namespace ranges

    /// Number of scalar fields in a serialized morphology genome (reals plus the leg count).
    constexpr int kMorphologyScalarCount = 48;

    MorphologyGenome random_morphology(Rng& rng);
    ControllerGenome random_controller(Rng& rng);

    MorphologyGenome mutate_morphology(const MorphologyGenome& g, const MutationRates& rates, Rng& rng);
    ControllerGenome mutate_controller(const ControllerGenome& c, Rng& rng);

    /// Midpoint controller. Passing a stride frequency overrides the midpoint.
    ControllerGenome default_controller();
    ControllerGenome default_controller(double stride_freq);

    bool is_valid(const MorphologyGenome& g);
    bool is_valid(const ControllerGenome& c);

    /// Flat view of every scalar field in a fixed order (leg count included as a real).
    std::vector<double> flatten(const MorphologyGenome& g);

} // namespace legdesign
