#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include <legdesign/archive.hpp>
#include <legdesign/evolution.hpp>
#include <legdesign/genome.hpp>
#include <legdesign/phenotype.hpp>

namespace legdesign {

    nlohmann::json to_json(const MorphologyGenome& g);
    nlohmann::json to_json(const ControllerGenome& c);
    nlohmann::json to_json(const Elite& e, const GridSpec& spec);
    nlohmann::json to_json(const RobotModel& m);

    MorphologyGenome morphology_from_json(const nlohmann::json& j);
    ControllerGenome controller_from_json(const nlohmann::json& j);
    Elite elite_from_json(const nlohmann::json& j);

    /// A malformed input line; `line` is 1-based, 0 when not line-oriented.
    class ParseError : public std::runtime_error {
    public:
        ParseError(const std::string& what, std::size_t line)
            : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line(line)
        {
        }
        std::size_t line;
    };

    /// One elite per line, ordered by cell key.
    void write_archive_jsonl(std::ostream& os, const Archive& a);
    /// Rebuilds an archive, checking every stored key against its features.
    Archive read_archive_jsonl(std::istream& is, const GridSpec& spec = GridSpec::standard());
    Archive load_archive(const std::string& path, const GridSpec& spec = GridSpec::standard());

    inline constexpr const char* kMetricsHeaderComment = "# metrics v1";

    void write_metrics_csv(std::ostream& os, const std::vector<MetricsRow>& rows);
    std::vector<MetricsRow> read_metrics_csv(std::istream& is);
    std::vector<MetricsRow> load_metrics(const std::string& path);

    class ConfigError : public std::runtime_error {
    public:
        using std::runtime_error::runtime_error;
    };

    /// Run configuration plus the output directory, as a flat key-value object.
    struct ConfigFile {
        RunConfig run = RunConfig::desk();
        std::string profile = "desk";
        std::string output_dir = "out";
    };

    ConfigFile profile_config(const std::string& profile);
    /// Overrides fields of `base` with the keys in `j`; unknown keys and bad types throw ConfigError.
    void apply_config(ConfigFile& base, const nlohmann::json& j);
    nlohmann::json config_to_json(const ConfigFile& c);

} // namespace legdesign
