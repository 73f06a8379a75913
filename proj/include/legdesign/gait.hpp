#pragma once

#include <array>
#include <cmath>
#include <numbers>

#include <legdesign/genome.hpp>

namespace legdesign {

    /// Sinusoidal joint-target generator for one leg template.
    ///
    /// The amplitude of every link is tied to that link's velocity limit,
    /// b = max_ang_vel / stride_freq, so the target never asks a joint to move
    /// faster than it can. Amplitudes are always recomputed from the limits.
    template <typename Scalar = double>
    struct GaitSpec {
        Scalar stride_freq = Scalar(1);
        std::array<Scalar, kLinksPerLeg> vert_offset{};
        std::array<Scalar, kLinksPerLeg> phase_offset{};
        std::array<Scalar, kLinksPerLeg> max_ang_vel{};

        Scalar amplitude(int link) const { return max_ang_vel[link] / stride_freq; }
        Scalar period() const { return Scalar(2) * std::numbers::pi_v<Scalar> / stride_freq; }
    };

    template <typename Scalar = double>
    GaitSpec<Scalar> make_gait(const ControllerGenome& c, const std::array<Scalar, kLinksPerLeg>& max_ang_vel)
    {
        GaitSpec<Scalar> g;
        g.stride_freq = static_cast<Scalar>(c.stride_freq);
        for (int l = 0; l < kLinksPerLeg; l++) {
            g.vert_offset[l] = static_cast<Scalar>(c.vert_offset[l]);
            g.phase_offset[l] = static_cast<Scalar>(c.phase_offset[l]);
        }
        g.max_ang_vel = max_ang_vel;
        return g;
    }

    /// Tripod phase group: legs alternate along each side and the two sides are
    /// anti-phased, so a hexapod lifts front+back of one side with the middle of
    /// the other. Returns 0 or pi.
    template <typename Scalar = double>
    Scalar phase_group(int side, int leg_index, [[maybe_unused]] int legs_per_side)
    {
        return ((leg_index + side) % 2) == 0 ? Scalar(0) : std::numbers::pi_v<Scalar>;
    }

    /// y = vo + (w_max / sf) sin(sf t + po + phase)
    template <typename Scalar>
    Scalar joint_target(const GaitSpec<Scalar>& g, int link, Scalar phase, Scalar t)
    {
        return g.vert_offset[link] + g.amplitude(link) * std::sin(g.stride_freq * t + g.phase_offset[link] + phase);
    }

    template <typename Scalar>
    Scalar joint_target_rate(const GaitSpec<Scalar>& g, int link, Scalar phase, Scalar t)
    {
        return g.amplitude(link) * g.stride_freq * std::cos(g.stride_freq * t + g.phase_offset[link] + phase);
    }

} // namespace legdesign
