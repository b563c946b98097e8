#pragma once

#include "tca/detectors.hpp"
#include "tca/portfolio.hpp"

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tca {

/// 7 descriptors followed by 3 smoothed anomaly intensities per descriptor.
inline constexpr std::size_t kFactorCount = kDescriptorCount * (1 + kAnomalyTypeCount);
inline constexpr std::size_t kPairCount = kFactorCount * (kFactorCount - 1) / 2;
inline constexpr std::size_t kGroupCount = kFactorCount + kPairCount;

static_assert(kFactorCount == 28);
static_assert(kPairCount == 378);
static_assert(kGroupCount == 406);

struct FactorInfo {
    std::size_t id = 0;
    Descriptor descriptor = Descriptor::Volatility;
    std::optional<AnomalyType> anomaly;  // empty for the descriptor itself
    std::string name;

    bool is_anomaly() const noexcept { return anomaly.has_value(); }
    /// Rarity-score factors may be missing while their history is cold.
    bool may_be_missing() const noexcept { return !anomaly && is_score(descriptor); }
};

const std::vector<FactorInfo>& factor_set();

constexpr std::size_t descriptor_factor(Descriptor d) { return index_of(d); }

constexpr std::size_t anomaly_factor(Descriptor d, AnomalyType type) {
    return kDescriptorCount + index_of(d) * kAnomalyTypeCount + static_cast<std::size_t>(type);
}

std::optional<std::size_t> find_factor(std::string_view name);

/// One or two factor ids; singles come first in `all_groups()`, then pairs
/// (i < j) in lexicographic order.
struct FactorGroup {
    std::array<std::size_t, 2> factors{};
    std::size_t size = 1;

    bool contains(std::size_t factor) const {
        return factors[0] == factor || (size == 2 && factors[1] == factor);
    }
};

const std::vector<FactorGroup>& all_groups();

/// "volatility_score" or "volatility_score+jump:spread".
std::string group_name(const FactorGroup& group);

}  // namespace tca
