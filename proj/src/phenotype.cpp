#include <algorithm>
#include <cmath>

#include <legdesign/phenotype.hpp>
#include <legdesign/simulator.hpp>

namespace legdesign {

    namespace {

        constexpr double kMinStrengthFactor = 0.1;

        // Largest and second-largest of three half-extents.
        std::pair<double, double> tube_dims(const Eigen::Vector3d& e)
        {
            std::array<double, 3> v{e[0], e[1], e[2]};
            std::sort(v.begin(), v.end());
            return {v[2], v[1]};
        }

    } // namespace

    double LegInstance::mass() const
    {
        double m = 0.0;
        for (const auto& l : links)
            m += l.mass;
        return m;
    }

    std::vector<std::string> ConstraintReport::failures() const
    {
        std::vector<std::string> f;
        if (!mass_ok)
            f.emplace_back("mass");
        if (!speed_ok)
            f.emplace_back("speed");
        if (!height_ok)
            f.emplace_back("height");
        return f;
    }

    double leg_position(int k, int legs_per_side)
    {
        if (legs_per_side <= 1)
            return 0.0;
        return -1.0 + 2.0 * static_cast<double>(k) / static_cast<double>(legs_per_side - 1);
    }

    double motor_mass(double max_torque, double max_ang_vel, const MassModel& mm)
    {
        return std::sqrt(std::max(0.0, max_torque * max_ang_vel) / mm.motor_power_scale);
    }

    LinkMass link_mass(double length, double width, double tube_thickness, double max_torque, double max_ang_vel,
        const MassModel& mm)
    {
        const double wall = std::clamp(tube_thickness, 0.0, 0.5 * width);
        const double inner = width - 2.0 * wall;
        LinkMass m;
        m.tube = mm.tube_density * length * (width * width - inner * inner);
        m.motor = motor_mass(max_torque, max_ang_vel, mm);
        m.mechanism = mm.mechanism_mass + m.motor;
        m.total = m.tube + m.mechanism;
        return m;
    }

    double body_mass(const Eigen::Vector3d& e, const MassModel& mm)
    {
        return mm.body_fixed_mass + mm.body_density * (8.0 * e.prod());
    }

    RobotModel expand(const MorphologyGenome& g, const MassModel& mm)
    {
        RobotModel model;
        model.body.extents = g.body_extents;
        model.body.com = g.body_com;
        model.body.mass = body_mass(g.body_extents, mm);
        model.legs_per_side = g.legs_per_side;
        model.tube_thickness = g.tube_thickness;

        const int n = g.legs_per_side;
        model.legs.reserve(static_cast<std::size_t>(2 * n));

        for (int s = 0; s < 2; s++) {
            const double mirror = s == 0 ? 1.0 : -1.0;
            for (int k = 0; k < n; k++) {
                const double u = leg_position(k, n);
                const double u2 = u * u;

                LegInstance leg;
                leg.side = static_cast<Side>(s);
                leg.index_along_body = k;
                leg.u = u;
                leg.attach_pitch = g.leg_attach_pitch;

                // Attach offsets are fractions of the body half-extents (forward, right).
                const Eigen::Vector2d offset = g.quad_attach_linear * u + g.quad_attach_quadratic * u2;
                const Eigen::Vector3d& e = g.body_extents;
                const Eigen::Vector3d& a = g.leg_attach_point;
                leg.attach_position = Eigen::Vector3d(e.x() * (a.x() + offset.x()), e.y() * a.y(),
                    mirror * e.z() * (1.0 + a.z() + offset.y()));

                const double length_factor = 1.0 + g.quad_length_mult * u2;
                const double width_factor = 1.0 + g.quad_width_mult * u2;
                const double strength_factor = std::max(kMinStrengthFactor, 1.0 + g.quad_strength_mult * u2);

                for (int l = 0; l < kLinksPerLeg; l++) {
                    const LinkGenes& genes = g.links[l];
                    LinkInstance& link = leg.links[l];
                    const auto [half_len, half_width] = tube_dims(genes.extents);
                    link.length = 2.0 * half_len * length_factor;
                    link.width = 2.0 * half_width * width_factor;
                    link.hinge_axis = genes.hinge_axis.normalized();
                    link.joint.strength = genes.joint_strength * strength_factor;
                    link.joint.damping = genes.joint_damping;
                    link.joint.max_torque = genes.max_torque * strength_factor;
                    link.joint.max_ang_vel = genes.max_ang_vel;

                    const LinkMass m = link_mass(link.length, link.width, g.tube_thickness, link.joint.max_torque,
                        link.joint.max_ang_vel, mm);
                    link.tube_mass = m.tube;
                    link.motor_mass = m.motor;
                    link.mechanism_mass = m.mechanism;
                    link.mass = m.total;
                }
                model.legs.push_back(leg);
            }
        }

        model.total_mass = model.body.mass;
        for (const auto& leg : model.legs)
            model.total_mass += leg.mass();
        return model;
    }

    FeatureVector features(const RobotModel& model, const MorphologyGenome& g)
    {
        double leg_length = 0.0;
        for (const auto& link : g.links)
            leg_length += 2.0 * tube_dims(link.extents).first;

        FeatureVector f;
        f << leg_length, model.total_mass, static_cast<double>(g.legs_per_side), g.tube_thickness, g.quad_length_mult,
            g.quad_width_mult;
        return f;
    }

    ConstraintReport check_constraints(const RobotModel& model, const SimResult& sim, const ConstraintConfig& cfg)
    {
        ConstraintReport r;
        r.mass = model.total_mass;
        r.speed = sim.duration > 0.0 ? sim.distance / sim.duration : 0.0;
        r.height = sim.standing_height;
        r.mass_ok = r.mass <= cfg.max_mass;
        r.speed_ok = r.speed > cfg.min_speed;
        r.height_ok = r.height >= cfg.min_height;
        return r;
    }

} // namespace legdesign
