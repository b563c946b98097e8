#include "tca/scores.hpp"

#include "tca/error.hpp"

#include <algorithm>
#include <cmath>

namespace tca {

EcdfState::EcdfState(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ == 0) throw DomainError("ECDF window capacity must be positive");
}

void EcdfState::update(double x) {
    if (!std::isfinite(x)) throw DomainError("ECDF update with non-finite value");
    if (fifo_.size() == capacity_) {
        const double oldest = fifo_.front();
        fifo_.pop_front();
        sorted_.erase(std::lower_bound(sorted_.begin(), sorted_.end(), oldest));
    }
    fifo_.push_back(x);
    sorted_.insert(std::upper_bound(sorted_.begin(), sorted_.end(), x), x);
}

double EcdfState::rarity_score(double x) const {
    if (sorted_.empty()) throw InsufficientHistoryError("rarity score requested on empty history");
    const auto lo = std::lower_bound(sorted_.begin(), sorted_.end(), x);
    const auto hi = std::upper_bound(lo, sorted_.end(), x);
    const auto below = static_cast<double>(lo - sorted_.begin());
    const auto equal = static_cast<double>(hi - lo);
    return (below + 0.5 * equal) / static_cast<double>(sorted_.size());
}

std::optional<double> causal_score(const EcdfState& state, double x, std::size_t min_history) {
    if (state.size() < std::max<std::size_t>(min_history, 1)) return std::nullopt;
    return state.rarity_score(x);
}

}  // namespace tca
