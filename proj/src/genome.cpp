#include <legdesign/genome.hpp>

namespace legdesign {

    namespace {

        constexpr double kMutationScale = 0.10;

        double sample(Rng& rng, const ParamRange& r) { return uniform(rng, r.lo, r.hi); }

        template <int N>
        Eigen::Matrix<double, N, 1> sample(Rng& rng, const std::array<ParamRange, N>& r)
        {
            Eigen::Matrix<double, N, 1> v;
            for (int i = 0; i < N; i++)
                v[i] = sample(rng, r[i]);
            return v;
        }

        int sample(Rng& rng, const IntRange& r) { return std::uniform_int_distribution<int>(r.lo, r.hi)(rng); }

        void perturb(double& x, const ParamRange& r, Rng& rng) { x = r.clamp(x + gaussian(rng, kMutationScale * r.span())); }

        template <typename Derived, std::size_t N>
        void perturb(Eigen::MatrixBase<Derived>& v, const std::array<ParamRange, N>& r, Rng& rng)
        {
            for (std::size_t i = 0; i < N; i++)
                v[i] = r[i].clamp(v[i] + gaussian(rng, kMutationScale * r[i].span()));
        }

        void perturb(int& x, const IntRange& r, Rng& rng)
        {
            const int step = std::bernoulli_distribution(0.5)(rng) ? 1 : -1;
            x = r.clamp(x + step);
        }

        bool fires(double rate, Rng& rng) { return uniform01(rng) < rate; }

        template <typename Derived, std::size_t N>
        bool within(const Eigen::MatrixBase<Derived>& v, const std::array<ParamRange, N>& r)
        {
            for (std::size_t i = 0; i < N; i++)
                if (!r[i].contains(v[i]))
                    return false;
            return true;
        }

    } // namespace

    bool MutationRates::valid() const
    {
        for (double r : {modify_leg, modify_num_legs, modify_num_links, modify_motor, modify_leg_offset, modify_body})
            if (!(r >= 0.0 && r <= 1.0))
                return false;
        return true;
    }

    MorphologyGenome random_morphology(Rng& rng)
    {
        MorphologyGenome g;
        g.body_extents = sample<3>(rng, ranges::body_extents);
        g.body_com = sample<2>(rng, ranges::body_com);
        g.legs_per_side = sample(rng, ranges::legs_per_side);
        g.leg_attach_point = sample<3>(rng, ranges::leg_attach_point);
        g.leg_attach_pitch = sample(rng, ranges::leg_attach_pitch);
        g.tube_thickness = sample(rng, ranges::tube_thickness);
        for (int l = 0; l < kLinksPerLeg; l++) {
            auto& link = g.links[l];
            link.extents = sample<3>(rng, ranges::link_extents);
            link.hinge_axis = sample<3>(rng, ranges::hinge_axis_for(l));
            link.joint_strength = sample(rng, ranges::joint_strength);
            link.joint_damping = sample(rng, ranges::joint_damping);
            link.max_torque = sample(rng, ranges::max_torque);
            link.max_ang_vel = sample(rng, ranges::max_ang_vel);
        }
        g.quad_attach_linear = sample<2>(rng, ranges::quad_attach_linear);
        g.quad_attach_quadratic = sample<2>(rng, ranges::quad_attach_quadratic);
        g.quad_length_mult = sample(rng, ranges::quad_length_mult);
        g.quad_width_mult = sample(rng, ranges::quad_width_mult);
        g.quad_strength_mult = sample(rng, ranges::quad_strength_mult);
        return g;
    }

    ControllerGenome random_controller(Rng& rng)
    {
        ControllerGenome c;
        c.stride_freq = sample(rng, ranges::stride_freq);
        for (int l = 0; l < kLinksPerLeg; l++) {
            c.vert_offset[l] = sample(rng, ranges::vert_offset);
            c.phase_offset[l] = sample(rng, ranges::phase_offset);
        }
        return c;
    }

    MorphologyGenome mutate_morphology(const MorphologyGenome& parent, const MutationRates& rates, Rng& rng)
    {
        MorphologyGenome g = parent;

        // Gates are drawn in a fixed order so the stream layout never depends on which fire.
        const bool leg = fires(rates.modify_leg, rng);
        const bool num_legs = fires(rates.modify_num_legs, rng);
        [[maybe_unused]] const bool num_links = fires(rates.modify_num_links, rng); // links are fixed at 3
        const bool motor = fires(rates.modify_motor, rng);
        const bool leg_offset = fires(rates.modify_leg_offset, rng);
        const bool body = fires(rates.modify_body, rng);

        if (leg) {
            for (int l = 0; l < kLinksPerLeg; l++) {
                perturb(g.links[l].extents, ranges::link_extents, rng);
                perturb(g.links[l].hinge_axis, ranges::hinge_axis_for(l), rng);
            }
            perturb(g.leg_attach_pitch, ranges::leg_attach_pitch, rng);
            perturb(g.tube_thickness, ranges::tube_thickness, rng);
        }
        if (num_legs)
            perturb(g.legs_per_side, ranges::legs_per_side, rng);
        if (motor) {
            for (auto& link : g.links) {
                perturb(link.joint_strength, ranges::joint_strength, rng);
                perturb(link.joint_damping, ranges::joint_damping, rng);
                perturb(link.max_torque, ranges::max_torque, rng);
                perturb(link.max_ang_vel, ranges::max_ang_vel, rng);
            }
        }
        if (leg_offset) {
            perturb(g.leg_attach_point, ranges::leg_attach_point, rng);
            perturb(g.quad_attach_linear, ranges::quad_attach_linear, rng);
            perturb(g.quad_attach_quadratic, ranges::quad_attach_quadratic, rng);
            perturb(g.quad_length_mult, ranges::quad_length_mult, rng);
            perturb(g.quad_width_mult, ranges::quad_width_mult, rng);
            perturb(g.quad_strength_mult, ranges::quad_strength_mult, rng);
        }
        if (body) {
            perturb(g.body_extents, ranges::body_extents, rng);
            perturb(g.body_com, ranges::body_com, rng);
        }
        return g;
    }

    ControllerGenome mutate_controller(const ControllerGenome& parent, Rng& rng)
    {
        ControllerGenome c = parent;
        perturb(c.stride_freq, ranges::stride_freq, rng);
        for (int l = 0; l < kLinksPerLeg; l++) {
            perturb(c.vert_offset[l], ranges::vert_offset, rng);
            perturb(c.phase_offset[l], ranges::phase_offset, rng);
        }
        return c;
    }

    ControllerGenome default_controller() { return default_controller(ranges::stride_freq.mid()); }

    ControllerGenome default_controller(double stride_freq)
    {
        ControllerGenome c;
        c.stride_freq = stride_freq;
        c.vert_offset.fill(ranges::vert_offset.mid());
        c.phase_offset.fill(ranges::phase_offset.mid());
        return c;
    }

    bool is_valid(const MorphologyGenome& g)
    {
        bool ok = within(g.body_extents, ranges::body_extents) && within(g.body_com, ranges::body_com)
            && ranges::legs_per_side.contains(g.legs_per_side) && within(g.leg_attach_point, ranges::leg_attach_point)
            && ranges::leg_attach_pitch.contains(g.leg_attach_pitch) && ranges::tube_thickness.contains(g.tube_thickness)
            && within(g.quad_attach_linear, ranges::quad_attach_linear)
            && within(g.quad_attach_quadratic, ranges::quad_attach_quadratic)
            && ranges::quad_length_mult.contains(g.quad_length_mult) && ranges::quad_width_mult.contains(g.quad_width_mult)
            && ranges::quad_strength_mult.contains(g.quad_strength_mult);
        for (int l = 0; l < kLinksPerLeg && ok; l++) {
            const auto& link = g.links[l];
            ok = within(link.extents, ranges::link_extents) && within(link.hinge_axis, ranges::hinge_axis_for(l))
                && ranges::joint_strength.contains(link.joint_strength)
                && ranges::joint_damping.contains(link.joint_damping) && ranges::max_torque.contains(link.max_torque)
                && ranges::max_ang_vel.contains(link.max_ang_vel);
        }
        return ok;
    }

    bool is_valid(const ControllerGenome& c)
    {
        if (!ranges::stride_freq.contains(c.stride_freq))
            return false;
        for (int l = 0; l < kLinksPerLeg; l++)
            if (!ranges::vert_offset.contains(c.vert_offset[l]) || !ranges::phase_offset.contains(c.phase_offset[l]))
                return false;
        return true;
    }

    std::vector<double> flatten(const MorphologyGenome& g)
    {
        std::vector<double> v;
        v.reserve(kMorphologyScalarCount);
        auto push = [&v](const auto& m) {
            for (Eigen::Index i = 0; i < m.size(); i++)
                v.push_back(m[i]);
        };
        push(g.body_extents);
        push(g.body_com);
        v.push_back(static_cast<double>(g.legs_per_side));
        push(g.leg_attach_point);
        v.push_back(g.leg_attach_pitch);
        v.push_back(g.tube_thickness);
        for (const auto& link : g.links) {
            push(link.extents);
            push(link.hinge_axis);
            v.push_back(link.joint_strength);
            v.push_back(link.joint_damping);
            v.push_back(link.max_torque);
            v.push_back(link.max_ang_vel);
        }
        push(g.quad_attach_linear);
        push(g.quad_attach_quadratic);
        v.push_back(g.quad_length_mult);
        v.push_back(g.quad_width_mult);
        v.push_back(g.quad_strength_mult);
        return v;
    }

} // namespace legdesign
