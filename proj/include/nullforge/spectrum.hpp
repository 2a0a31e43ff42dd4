#pragma once

#include "error.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

namespace nullforge {

enum class SpectrumKind { eigen, singular };

inline std::string to_string(SpectrumKind k) { return k == SpectrumKind::eigen ? "eigen" : "singular"; }

/// Ascending real spectrum. `mode_index[p]` labels `values[p]` (1-based mode
/// number k); by default the position in ascending order.
struct Spectrum {
    std::vector<double> values;
    SpectrumKind kind{SpectrumKind::eigen};
    std::vector<int> mode_index;
    std::vector<double> gaps;

    Spectrum() = default;

    Spectrum(std::vector<double> v, SpectrumKind k) : kind(k) {
        std::stable_sort(v.begin(), v.end());
        std::vector<int> idx(v.size());
        std::iota(idx.begin(), idx.end(), 1);
        assign(std::move(v), std::move(idx));
    }

    /// Values paired with explicit mode labels; sorted ascending by value.
    Spectrum(std::vector<double> v, std::vector<int> modes, SpectrumKind k) : kind(k) {
        if (v.size() != modes.size()) throw DimensionError("spectrum values and mode labels differ in length");
        assign(std::move(v), std::move(modes));
    }

    std::size_t size() const noexcept { return values.size(); }

    /// Value carrying mode label k, or throws if absent.
    double at_mode(int k) const {
        for (std::size_t p = 0; p < mode_index.size(); ++p)
            if (mode_index[p] == k) return values[p];
        throw DomainError("spectrum has no mode " + std::to_string(k));
    }

private:
    void assign(std::vector<double> v, std::vector<int> modes) {
        std::vector<std::size_t> order(v.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
        values.clear();
        mode_index.clear();
        for (auto p : order) {
            values.push_back(v[p]);
            mode_index.push_back(modes[p]);
        }
        gaps.clear();
        for (std::size_t p = 1; p < values.size(); ++p) gaps.push_back(values[p] - values[p - 1]);
    }
};

} // namespace nullforge
