#pragma once

#include <functional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace zerofail {

namespace tags {
inline constexpr std::string_view kRegular = "regular";
inline constexpr std::string_view kAttack = "attack";
inline constexpr std::string_view kSuspectClerical = "suspect_clerical";
inline constexpr std::string_view kLowQuality = "low_quality";
/// Metadata tag prefix recording how many raters produced an estimate.
inline constexpr std::string_view kRatersPrefix = "raters=";
}  // namespace tags

/// One subject's record. Tags are curator-supplied labels (see `tags`) or
/// `key=value` metadata.
struct Sample {
    std::string sample_id;
    double actual_age = 0.0;
    double estimate = 0.0;
    std::set<std::string, std::less<>> tags;

    bool has_tag(std::string_view tag) const { return tags.contains(tag); }

    friend bool operator==(const Sample&, const Sample&) = default;
};

using Dataset = std::vector<Sample>;

}  // namespace zerofail
