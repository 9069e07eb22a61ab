#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace evsom {

enum class GroupKind { Earnings, Rate, Spike, FundWeight };

std::string to_string(GroupKind kind);
GroupKind group_kind_from(const std::string& text);

/// One injected-effect group. `magnitude` is the AR shock for earnings
/// groups, the rate-change loading for rate groups, the one-day return spike
/// for spike groups, and the forced modified active weight for fund-weight
/// groups. `timing` (optional) pins the announcement offset for earnings
/// groups or the spike day (return-calendar index) for spike groups;
/// unset means drawn/auto-placed.
struct GroupSpec {
    GroupKind kind = GroupKind::Earnings;
    double fraction = 0.0;
    double magnitude = 0.0;
    std::optional<int> timing;
};

/// Seeded synthetic market with overlapping clustered events. Securities
/// follow a single-factor model; group members additionally receive their
/// configured effect. Fund weights are drawn independently of every shock
/// group.
struct ScenarioSpec {
    int n_securities = 500;
    int n_days = 266;      // length of the return calendar
    int event_index = 256; // index of the event day in the return calendar
    double beta_lo = 0.8;
    double beta_hi = 1.2;
    double noise_sigma = 0.01;
    double market_sigma = 0.01;
    double rate_sigma = 0.02;
    int est_len = 250;
    int half_window = 5;
    std::vector<GroupSpec> groups;
    std::uint64_t seed = 1;

    void validate() const;
};

struct ScenarioFiles {
    std::filesystem::path prices;
    std::filesystem::path weights;
    std::filesystem::path announcements;
    std::filesystem::path rates;
    std::filesystem::path truth;
};

/// Writes prices.csv, weights.csv, announcements.csv, rates.csv, and
/// truth.csv into out_dir. Byte-identical for identical specs. The market
/// series trades under ticker "MKT".
///
/// When a spike group has no pinned timing, the spike lands on the
/// estimation-window day whose market return is closest to the window mean,
/// and that day's market return is set to the exact mean of the remaining
/// days, which makes the downstream intercept shift exactly
/// magnitude / est_len.
ScenarioFiles generate_scenario(const ScenarioSpec& spec, const std::filesystem::path& out_dir);

extern const char* const kMarketTicker;

struct TruthRow {
    std::string ticker;
    std::string group;  // earnings | rate | spike | fund-weight | none
    double magnitude = 0.0;
    std::optional<int> timing;
};

void write_truth_csv(const std::vector<TruthRow>& rows, const std::filesystem::path& path);
std::vector<TruthRow> load_truth(const std::filesystem::path& path);

/// Detection outcome tallies per effect kind. Kinds with a genuine
/// event-window effect (earnings, rate) count detections as true positives;
/// the others (spike, fund-weight, none) count them as false positives.
struct ConfusionRow {
    std::string kind;
    int total = 0;
    int detected = 0;
    int true_pos = 0;
    int false_pos = 0;
    int false_neg = 0;
    int true_neg = 0;
};

std::vector<ConfusionRow> ground_truth_confusion(const std::map<std::string, bool>& detected,
                                                 const std::vector<TruthRow>& truth);

}  // namespace evsom
