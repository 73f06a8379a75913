#include <algorithm>
#include <cmath>
#include <ostream>

#include <legdesign/simulator.hpp>

namespace legdesign {

    namespace {

        struct Aabb {
            Eigen::Vector3d lo;
            Eigen::Vector3d hi;

            bool overlaps(const Aabb& o) const { return (lo.array() <= o.hi.array()).all() && (o.lo.array() <= hi.array()).all(); }
        };

        Aabb segment_box(const Eigen::Vector3d& a, const Eigen::Vector3d& b, double r)
        {
            return {a.cwiseMin(b).array() - r, a.cwiseMax(b).array() + r};
        }

    } // namespace

    double segment_distance(const Eigen::Vector3d& p0, const Eigen::Vector3d& p1, const Eigen::Vector3d& q0,
        const Eigen::Vector3d& q1)
    {
        constexpr double eps = 1e-14;
        const Eigen::Vector3d d1 = p1 - p0;
        const Eigen::Vector3d d2 = q1 - q0;
        const Eigen::Vector3d r = p0 - q0;
        const double a = d1.squaredNorm();
        const double e = d2.squaredNorm();
        const double f = d2.dot(r);

        double s = 0.0, t = 0.0;
        if (a <= eps && e <= eps)
            return r.norm();
        if (a <= eps) {
            t = std::clamp(f / e, 0.0, 1.0);
        }
        else {
            const double c = d1.dot(r);
            if (e <= eps) {
                s = std::clamp(-c / a, 0.0, 1.0);
            }
            else {
                const double b = d1.dot(d2);
                const double denom = a * e - b * b;
                s = denom > eps ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
                t = (b * s + f) / e;
                if (t < 0.0) {
                    t = 0.0;
                    s = std::clamp(-c / a, 0.0, 1.0);
                }
                else if (t > 1.0) {
                    t = 1.0;
                    s = std::clamp((b - c) / a, 0.0, 1.0);
                }
            }
        }
        return ((p0 + d1 * s) - (q0 + d2 * t)).norm();
    }

    double segment_box_distance(const Eigen::Vector3d& a, const Eigen::Vector3d& b, const Eigen::Vector3d& half)
    {
        // Distance from a point on the segment to a convex box is convex in the
        // segment parameter, so a golden-section search finds the minimum.
        auto dist = [&](double s) {
            const Eigen::Vector3d p = a + s * (b - a);
            return (p.cwiseAbs() - half).cwiseMax(0.0).norm();
        };
        constexpr double inv_phi = 0.6180339887498949;
        double lo = 0.0, hi = 1.0;
        double x1 = hi - inv_phi * (hi - lo), x2 = lo + inv_phi * (hi - lo);
        double f1 = dist(x1), f2 = dist(x2);
        for (int i = 0; i < 60 && hi - lo > 1e-10; i++) {
            if (f1 <= f2) {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - inv_phi * (hi - lo);
                f1 = dist(x1);
            }
            else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + inv_phi * (hi - lo);
                f2 = dist(x2);
            }
        }
        return std::min({dist(0.0), dist(1.0), dist(0.5 * (lo + hi))});
    }

    int SimConfig::steps() const { return static_cast<int>(std::llround(duration / dt)); }

    bool SimConfig::valid() const
    {
        return dt > 0.0 && duration >= dt && substeps >= 1 && stance_epsilon >= 0.0 && gravity > 0.0;
    }

    JointStep step_joint(const JointState& s, double target, double stiffness, double damping, double max_torque,
        double max_ang_vel, double inertia, double dt)
    {
        JointStep out;
        out.torque = std::clamp(stiffness * (target - s.angle) - damping * s.velocity, -max_torque, max_torque);
        out.state.velocity = std::clamp(s.velocity + (out.torque / inertia) * dt, -max_ang_vel, max_ang_vel);
        out.state.angle = s.angle + out.state.velocity * dt;
        out.power = std::abs(out.torque * out.state.velocity);
        return out;
    }

    double effective_inertia(const LegInstance& leg, int link)
    {
        const auto& own = leg.links[static_cast<std::size_t>(link)];
        double inertia = own.mechanism_mass * own.length * own.length + own.tube_mass * own.length * own.length / 3.0;
        double reach = own.length;
        for (int j = link + 1; j < kLinksPerLeg; j++) {
            const auto& distal = leg.links[static_cast<std::size_t>(j)];
            reach += distal.length;
            inertia += distal.mass * reach * reach;
        }
        return std::max(inertia, kMinInertia);
    }

    Rollout::Rollout(const RobotModel& model, const ControllerGenome& controller, const SimConfig& cfg)
        : _model(&model), _cfg(cfg)
    {
        const std::size_t n_legs = model.legs.size();
        std::array<double, kLinksPerLeg> w_max{};
        for (int l = 0; l < kLinksPerLeg && n_legs > 0; l++)
            w_max[l] = model.legs.front().links[l].joint.max_ang_vel;
        _gait = make_gait<double>(controller, w_max);

        _inertia.resize(n_legs * kLinksPerLeg);
        _joints.resize(n_legs * kLinksPerLeg);
        for (std::size_t i = 0; i < n_legs; i++) {
            const auto& leg = model.legs[i];
            const double group = phase_group<double>(static_cast<int>(leg.side), leg.index_along_body, model.legs_per_side);
            for (int l = 0; l < kLinksPerLeg; l++) {
                const double phase = group + (l > 0 ? _cfg.lift_phase_lead : 0.0);
                _inertia[i * kLinksPerLeg + l] = effective_inertia(leg, l);
                _joints[i * kLinksPerLeg + l] = {joint_target(_gait, l, phase, 0.0), 0.0};
            }
        }

        _points.resize(n_legs);
        _pose();

        _result.duration = static_cast<double>(_cfg.steps()) * _cfg.dt;
        double lowest = std::numeric_limits<double>::infinity();
        for (const auto& p : _points)
            lowest = std::min(lowest, p.back().y());
        _result.standing_height = n_legs > 0 ? model.body.extents.y() - lowest : 0.0;
    }

    void Rollout::_pose()
    {
        for (std::size_t i = 0; i < _points.size(); i++) {
            const JointAngles q{_joints[i * kLinksPerLeg].angle, _joints[i * kLinksPerLeg + 1].angle,
                _joints[i * kLinksPerLeg + 2].angle};
            _points[i] = leg_points(_model->legs[i], q);
        }
    }

    bool Rollout::_self_intersecting() const
    {
        const auto& legs = _model->legs;
        const std::size_t n = legs.size();

        std::vector<std::array<Aabb, kLinksPerLeg>> link_boxes(n);
        std::vector<Aabb> leg_boxes(n);
        for (std::size_t i = 0; i < n; i++) {
            for (int l = 0; l < kLinksPerLeg; l++)
                link_boxes[i][l] = segment_box(_points[i][l], _points[i][l + 1], 0.5 * legs[i].links[l].width);
            leg_boxes[i] = link_boxes[i][0];
            for (int l = 1; l < kLinksPerLeg; l++) {
                leg_boxes[i].lo = leg_boxes[i].lo.cwiseMin(link_boxes[i][l].lo);
                leg_boxes[i].hi = leg_boxes[i].hi.cwiseMax(link_boxes[i][l].hi);
            }
        }

        auto touching = [&](std::size_t i, int a, std::size_t j, int b) {
            if (!link_boxes[i][a].overlaps(link_boxes[j][b]))
                return false;
            const double reach = 0.5 * (legs[i].links[a].width + legs[j].links[b].width);
            return segment_distance(_points[i][a], _points[i][a + 1], _points[j][b], _points[j][b + 1]) < reach;
        };

        const Eigen::Vector3d& body = _model->body.extents;
        const Aabb body_box{-body, body};

        for (std::size_t i = 0; i < n; i++) {
            // Same leg: only the first and last links are non-adjacent.
            if (touching(i, 0, i, 2))
                return true;
            // Body against every link except the one mounted on it.
            for (int l = 1; l < kLinksPerLeg; l++) {
                if (!link_boxes[i][l].overlaps(body_box))
                    continue;
                if (segment_box_distance(_points[i][l], _points[i][l + 1], body) < 0.5 * legs[i].links[l].width)
                    return true;
            }
            for (std::size_t j = i + 1; j < n; j++) {
                if (!leg_boxes[i].overlaps(leg_boxes[j]))
                    continue;
                for (int a = 0; a < kLinksPerLeg; a++)
                    for (int b = 0; b < kLinksPerLeg; b++)
                        if (touching(i, a, j, b))
                            return true;
            }
        }
        return false;
    }

    bool Rollout::advance(int steps)
    {
        const auto& legs = _model->legs;
        const std::size_t n_legs = legs.size();
        const int total = _cfg.steps();
        const double h = _cfg.dt / static_cast<double>(_cfg.substeps);

        std::vector<double> phase(n_legs * kLinksPerLeg);
        for (std::size_t i = 0; i < n_legs; i++) {
            const double group = phase_group<double>(static_cast<int>(legs[i].side), legs[i].index_along_body, _model->legs_per_side);
            for (int l = 0; l < kLinksPerLeg; l++)
                phase[i * kLinksPerLeg + l] = group + (l > 0 ? _cfg.lift_phase_lead : 0.0);
        }
        std::vector<double> step_energy(_joints.size());
        std::vector<double> last_torque(_joints.size());
        std::vector<double> foot_x(n_legs);

        for (int k = 0; k < steps && !_finished; k++) {
            const double t0 = static_cast<double>(_step) * _cfg.dt;
            if (_step >= total) {
                _finished = true;
                break;
            }
            if (n_legs == 0 || _self_intersecting()) {
                _result.terminated = n_legs == 0 ? Termination::None : Termination::SelfIntersection;
                _result.duration_run = t0;
                _finished = true;
                break;
            }

            for (std::size_t i = 0; i < n_legs; i++)
                foot_x[i] = _points[i].back().x();

            std::fill(step_energy.begin(), step_energy.end(), 0.0);
            // Each link's sinusoid is anchored once per control step and then
            // advanced by a fixed rotation per substep. The opposite group is
            // the same wave shifted by pi, i.e. mirrored about the offset.
            std::array<double, kLinksPerLeg> sn{}, cs{};
            for (int l = 0; l < kLinksPerLeg; l++) {
                const double lead = l > 0 ? _cfg.lift_phase_lead : 0.0;
                const double arg = _gait.stride_freq * t0 + _gait.phase_offset[l] + lead;
                sn[l] = std::sin(arg);
                cs[l] = std::cos(arg);
            }
            const double rot_s = std::sin(_gait.stride_freq * h), rot_c = std::cos(_gait.stride_freq * h);
            for (int s = 1; s <= _cfg.substeps; s++) {
                std::array<std::array<double, kLinksPerLeg>, 2> targets{};
                for (int l = 0; l < kLinksPerLeg; l++) {
                    const double next_s = sn[l] * rot_c + cs[l] * rot_s;
                    cs[l] = cs[l] * rot_c - sn[l] * rot_s;
                    sn[l] = next_s;
                    const double swing = _gait.amplitude(l) * sn[l];
                    targets[0][l] = _gait.vert_offset[l] + swing;
                    targets[1][l] = _gait.vert_offset[l] - swing;
                }
                for (std::size_t i = 0; i < n_legs; i++) {
                    const int group = phase[i * kLinksPerLeg] == 0.0 ? 0 : 1;
                    for (int l = 0; l < kLinksPerLeg; l++) {
                        const std::size_t j = i * kLinksPerLeg + l;
                        const auto& joint = legs[i].links[l].joint;
                        const JointStep js = step_joint(_joints[j], targets[group][l], joint.strength, joint.damping,
                            joint.max_torque, joint.max_ang_vel, _inertia[j], h);
                        _joints[j] = js.state;
                        last_torque[j] = js.torque;
                        step_energy[j] += js.power * h;
                    }
                }
            }

            _pose();

            double lowest = std::numeric_limits<double>::infinity();
            for (const auto& p : _points)
                lowest = std::min(lowest, p.back().y());
            double shift = 0.0;
            int stance_count = 0;
            std::vector<std::uint8_t> stance(n_legs, 0);
            for (std::size_t i = 0; i < n_legs; i++) {
                if (_points[i].back().y() <= lowest + _cfg.stance_epsilon) {
                    stance[i] = 1;
                    shift += _points[i].back().x() - foot_x[i];
                    stance_count++;
                }
            }
            if (stance_count > 0)
                _result.distance -= shift / static_cast<double>(stance_count);

            double energy = 0.0;
            for (double e : step_energy)
                energy += e;
            _result.energy += energy;

            _step++;
            _result.steps = _step;
            _result.duration_run = static_cast<double>(_step) * _cfg.dt;

            if (_cfg.record_log) {
                StepRecord rec;
                rec.t = _result.duration_run;
                rec.angles.reserve(_joints.size());
                for (const auto& js : _joints)
                    rec.angles.push_back(js.angle);
                rec.torques = last_torque;
                rec.powers.reserve(_joints.size());
                for (double e : step_energy)
                    rec.powers.push_back(e / _cfg.dt);
                rec.stance = std::move(stance);
                rec.distance = _result.distance;
                rec.energy = _result.energy;
                _result.log.push_back(std::move(rec));
            }

            if (_step >= total)
                _finished = true;
        }
        return !_finished;
    }

    SimResult simulate(const RobotModel& model, const ControllerGenome& controller, const SimConfig& cfg)
    {
        Rollout rollout(model, controller, cfg);
        rollout.advance(cfg.steps());
        return rollout.result();
    }

    double cost_of_transport(const SimResult& res, double mass, double gravity)
    {
        if (!(res.distance > 0.0))
            return std::numeric_limits<double>::infinity();
        return res.energy / (mass * gravity * res.distance);
    }

    double fitness(const SimResult& res, double mass, double gravity)
    {
        const double cot = cost_of_transport(res, mass, gravity);
        if (std::isinf(cot))
            return 0.0;
        if (cot <= 0.0)
            return std::numeric_limits<double>::infinity();
        return 1.0 / cot;
    }

    void write_trace_csv(std::ostream& os, const RobotModel& model, const SimResult& res)
    {
        const std::size_t n_legs = model.legs.size();
        os << "t";
        for (const char* field : {"angle", "torque", "power"})
            for (std::size_t i = 0; i < n_legs; i++)
                for (int l = 0; l < kLinksPerLeg; l++)
                    os << ',' << field << '_' << i << '_' << l;
        for (std::size_t i = 0; i < n_legs; i++)
            os << ",stance_" << i;
        os << ",distance,energy\n";

        os.precision(17);
        for (const auto& r : res.log) {
            os << r.t;
            for (double v : r.angles)
                os << ',' << v;
            for (double v : r.torques)
                os << ',' << v;
            for (double v : r.powers)
                os << ',' << v;
            for (auto s : r.stance)
                os << ',' << static_cast<int>(s);
            os << ',' << r.distance << ',' << r.energy << '\n';
        }
    }

} // namespace legdesign
