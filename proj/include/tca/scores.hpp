#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <vector>

namespace tca {

inline constexpr std::size_t kDefaultScoreWindow = 2000;
inline constexpr std::size_t kDefaultScoreMinHistory = 30;

/// Trailing-window empirical CDF of one raw market series.
///
/// Holds at most `capacity` past values in arrival order plus a sorted copy
/// for rank queries. Queries never mutate the state.
class EcdfState {
public:
    explicit EcdfState(std::size_t capacity = kDefaultScoreWindow);

    /// Appends x, evicting the oldest value when full. Throws DomainError on
    /// non-finite input.
    void update(double x);

    /// Mid-rank ECDF value (#{v < x} + 0.5 #{v == x}) / |window|.
    /// Throws InsufficientHistoryError on an empty window.
    double rarity_score(double x) const;

    std::size_t size() const noexcept { return fifo_.size(); }
    std::size_t capacity() const noexcept { return capacity_; }
    bool empty() const noexcept { return fifo_.empty(); }

    const std::deque<double>& window() const noexcept { return fifo_; }

private:
    std::size_t capacity_;
    std::deque<double> fifo_;
    std::vector<double> sorted_;
};

/// Causal score of x against history strictly before it, or nullopt while
/// fewer than `min_history` values have been seen (cold start).
std::optional<double> causal_score(const EcdfState& state, double x, std::size_t min_history);

}  // namespace tca
