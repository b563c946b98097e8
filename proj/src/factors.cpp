#include "tca/factors.hpp"

namespace tca {

const std::vector<FactorInfo>& factor_set() {
    static const std::vector<FactorInfo> factors = [] {
        std::vector<FactorInfo> out;
        out.reserve(kFactorCount);
        for (const auto d : kAllDescriptors) {
            out.push_back({out.size(), d, std::nullopt, std::string(descriptor_name(d))});
        }
        for (const auto d : kAllDescriptors) {
            for (std::size_t t = 0; t < kAnomalyTypeCount; ++t) {
                const auto type = static_cast<AnomalyType>(t);
                out.push_back({out.size(), d, type,
                               std::string(anomaly_type_name(type)) + ":" +
                                   std::string(descriptor_name(d))});
            }
        }
        return out;
    }();
    return factors;
}

std::optional<std::size_t> find_factor(std::string_view name) {
    for (const auto& f : factor_set()) {
        if (f.name == name) return f.id;
    }
    return std::nullopt;
}

const std::vector<FactorGroup>& all_groups() {
    static const std::vector<FactorGroup> groups = [] {
        std::vector<FactorGroup> out;
        out.reserve(kGroupCount);
        for (std::size_t i = 0; i < kFactorCount; ++i) out.push_back({{i, i}, 1});
        for (std::size_t i = 0; i < kFactorCount; ++i) {
            for (std::size_t j = i + 1; j < kFactorCount; ++j) out.push_back({{i, j}, 2});
        }
        return out;
    }();
    return groups;
}

std::string group_name(const FactorGroup& group) {
    const auto& f = factor_set();
    if (group.size == 1) return f[group.factors[0]].name;
    return f[group.factors[0]].name + "+" + f[group.factors[1]].name;
}

}  // namespace tca
