#include <cmath>
#include <cstdio>
#include <sstream>

#include <legdesign/analysis/design_rules.hpp>

namespace legdesign::analysis {

    namespace {

        const char* const kMacron = "\xCC\x84";   // combining overline
        const char* const kMinus = "\xE2\x88\x92"; // minus sign

        // |v_j| values closer than this are treated as tied when picking the target.
        constexpr double kTargetTieTolerance = 1e-9;

        std::string mean_symbol(const std::string& sym)
        {
            if (sym.empty())
                return sym;
            return sym.substr(0, 1) + kMacron + sym.substr(1);
        }

        std::string sig3(double x)
        {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%#.3g", x);
            return buf;
        }

    } // namespace

    double DesignRule::predict(const Eigen::Ref<const Eigen::VectorXd>& g) const
    {
        double y = intercept;
        for (const auto& t : terms)
            y += t.coefficient * (g(t.feature) - t.mean);
        return y;
    }

    double rule_error_percent(const DesignRule& rule, const Eigen::MatrixXd& samples)
    {
        const double s = scales(samples)(rule.target);
        double sum = 0.0;
        for (Eigen::Index i = 0; i < samples.rows(); i++)
            sum += std::abs(rule.predict(samples.row(i).transpose()) - samples(i, rule.target));
        return sum / static_cast<double>(samples.rows()) / s * 100.0;
    }

    std::vector<DesignRule> extract_rules(const Eigen::MatrixXd& samples, double threshold)
    {
        const Eigen::VectorXd s = scales(samples);
        const Eigen::VectorXd mean = samples.colwise().mean().transpose();
        const SymEigen<double> eig = jacobi_eigen(normalized_covariance(samples));

        std::vector<DesignRule> rules;
        for (Eigen::Index k = 0; k < eig.values.size(); k++) {
            // Round-off can leave a zero eigenvalue slightly negative.
            const double e = std::max(0.0, eig.values(k));
            if (std::sqrt(e) > threshold)
                continue;
            const Eigen::VectorXd v = eig.vectors.col(k);

            // Solve for the dominant component; near-ties go to the later feature.
            int target = 0;
            for (int j = 1; j < v.size(); j++)
                if (std::abs(v(j)) >= std::abs(v(target)) - kTargetTieTolerance)
                    target = j;

            DesignRule r;
            r.target = target;
            r.intercept = mean(target);
            r.eigenvalue = eig.values(k);
            r.sqrt_eigenvalue = std::sqrt(e);
            for (int j = 0; j < v.size(); j++) {
                if (j == target)
                    continue;
                const double c = -(v(j) * s(target)) / (v(target) * s(j));
                if (c == 0.0)
                    continue;
                r.terms.push_back({j, c, mean(j), std::abs(c * s(j))});
            }
            std::stable_sort(r.terms.begin(), r.terms.end(), [](const RuleTerm& a, const RuleTerm& b) {
                if (a.weight != b.weight)
                    return a.weight > b.weight;
                return a.feature < b.feature;
            });
            r.mean_error_percent = rule_error_percent(r, samples);
            rules.push_back(std::move(r));
        }
        return rules;
    }

    std::string format_rules(const std::vector<DesignRule>& rules, const std::vector<std::string>& names,
        const std::vector<std::string>& symbols)
    {
        const std::vector<std::string>& sym = symbols.empty() ? names : symbols;
        std::ostringstream os;
        os << "Design rule\tMean error\n";
        for (const auto& r : rules) {
            os << names.at(static_cast<std::size_t>(r.target)) << " = "
               << mean_symbol(sym.at(static_cast<std::size_t>(r.target)));
            for (const auto& t : r.terms) {
                const std::string& x = sym.at(static_cast<std::size_t>(t.feature));
                os << (t.coefficient < 0.0 ? std::string(" ") + kMinus + " " : std::string(" + "))
                   << sig3(std::abs(t.coefficient)) << "(" << x << " " << kMinus << " " << mean_symbol(x) << ")";
            }
            char err[32];
            std::snprintf(err, sizeof err, "%.2f%%", r.mean_error_percent);
            os << "\t" << err << "\n";
        }
        return os.str();
    }

} // namespace legdesign::analysis
