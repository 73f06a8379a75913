#pragma once

#include <array>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <legdesign/phenotype.hpp>

namespace legdesign {

    using JointAngles = std::array<double, kLinksPerLeg>;

    /// Joint positions of one leg in the body frame: attach point, two
    /// intermediate joints and the foot.
    ///
    /// Straight pose: link 0 points outward, links 1 and 2 hang straight down.
    /// Joint 0 yaws about its (near vertical) hinge. A positive joint-1 angle
    /// abducts the thigh away from the body, a positive joint-2 angle folds the
    /// shank back towards the body. The whole chain is pitched about the lateral
    /// axis by the attach pitch. Left legs are exact mirror images.
    using LegPoints = std::array<Eigen::Vector3d, kLinksPerLeg + 1>;

    inline LegPoints leg_points(const LegInstance& leg, const JointAngles& q)
    {
        const double mirror = leg.side == Side::Left ? -1.0 : 1.0;
        Eigen::Vector3d attach = leg.attach_position;
        attach.z() *= mirror;

        const Eigen::Matrix3d base = Eigen::AngleAxisd(leg.attach_pitch, Eigen::Vector3d::UnitZ()).toRotationMatrix();
        const Eigen::Matrix3d r0 = base * Eigen::AngleAxisd(q[0], leg.links[0].hinge_axis).toRotationMatrix();
        const Eigen::Matrix3d r1 = r0 * Eigen::AngleAxisd(-q[1], leg.links[1].hinge_axis).toRotationMatrix();
        const Eigen::Matrix3d r2 = r1 * Eigen::AngleAxisd(q[2], leg.links[2].hinge_axis).toRotationMatrix();

        LegPoints p;
        p[0] = attach;
        p[1] = p[0] + r0 * Eigen::Vector3d(0.0, 0.0, leg.links[0].length);
        p[2] = p[1] + r1 * Eigen::Vector3d(0.0, -leg.links[1].length, 0.0);
        p[3] = p[2] + r2 * Eigen::Vector3d(0.0, -leg.links[2].length, 0.0);
        if (mirror < 0.0)
            for (auto& x : p)
                x.z() = -x.z();
        return p;
    }

    /// Closest distance between segments [p0,p1] and [q0,q1].
    double segment_distance(const Eigen::Vector3d& p0, const Eigen::Vector3d& p1, const Eigen::Vector3d& q0,
        const Eigen::Vector3d& q1);

    /// Closest distance between a segment and an origin-centred box with the given half-extents.
    double segment_box_distance(const Eigen::Vector3d& a, const Eigen::Vector3d& b, const Eigen::Vector3d& half_extents);

} // namespace legdesign
