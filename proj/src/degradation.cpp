#include "deeprep/degradation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "deeprep/rng.hpp"

namespace deeprep {

void DegradeSpec::validate() const {
    auto check_rate = [](double r, const char* what) {
        if (r < 0.0 || r > 1.0) {
            throw std::invalid_argument(std::string("DegradeSpec: ") + what + " must be in [0,1]");
        }
    };
    check_rate(mr, "mr");
    check_rate(point_mr, "point_mr");
    check_rate(stripe_mr, "stripe_mr");
    for (double r : group_rates) check_rate(r, "group rate");
}

DegradeSpec::Case parse_case(const std::string& name) {
    if (name == "point") return DegradeSpec::Case::point;
    if (name == "stripe") return DegradeSpec::Case::stripe;
    if (name == "deadline") return DegradeSpec::Case::deadline;
    if (name == "mixed") return DegradeSpec::Case::mixed;
    throw std::invalid_argument("unknown degradation case: " + name);
}

std::string case_name(DegradeSpec::Case c) {
    switch (c) {
        case DegradeSpec::Case::point: return "point";
        case DegradeSpec::Case::stripe: return "stripe";
        case DegradeSpec::Case::deadline: return "deadline";
        default: return "mixed";
    }
}

namespace {

void check_rate(double mr) {
    if (mr < 0.0 || mr > 1.0) throw std::invalid_argument("missing rate must be in [0,1]");
}

// First `count` elements of a seeded partial Fisher-Yates shuffle of 0..n-1.
std::vector<Index> sample_without_replacement(Index n, Index count, Rng& rng) {
    std::vector<Index> pool(static_cast<std::size_t>(n));
    std::iota(pool.begin(), pool.end(), Index{0});
    for (Index i = 0; i < count; ++i) {
        const Index j = i + static_cast<Index>(rng.below(static_cast<std::uint64_t>(n - i)));
        std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
    }
    pool.resize(static_cast<std::size_t>(count));
    return pool;
}

}  // namespace

Mask gen_point_mask(const Dims& dims, double mr, std::uint64_t seed) {
    check_rate(mr);
    Mask mask(dims[0], dims[1], dims[2], true);
    const Index total = dims[0] * dims[1] * dims[2];
    const Index missing = std::llround(mr * static_cast<double>(total));
    Rng rng(seed);
    for (Index idx : sample_without_replacement(total, missing, rng)) {
        mask.set_flat(static_cast<std::size_t>(idx), false);
    }
    return mask;
}

Mask gen_stripe_mask(const Dims& dims, double mr, std::uint64_t seed) {
    check_rate(mr);
    Mask mask(dims[0], dims[1], dims[2], true);
    const Index stripes = static_cast<Index>(std::floor(mr * static_cast<double>(dims[1])));
    Rng rng(seed);
    for (Index j : sample_without_replacement(dims[1], stripes, rng)) {
        for (Index l = 0; l < dims[0]; ++l)
            for (Index s = 0; s < dims[2]; ++s) mask.set(l, j, s, false);
    }
    return mask;
}

namespace {

// Splits `total` into `parts` positive integers via a seeded
// stars-and-bars draw (distinct cut points in 1..total-1).
std::vector<Index> random_composition(Index total, Index parts, Rng& rng) {
    std::vector<Index> cuts = sample_without_replacement(total - 1, parts - 1, rng);
    for (Index& c : cuts) ++c;  // shift 0..total-2 to 1..total-1
    cuts.push_back(0);
    cuts.push_back(total);
    std::sort(cuts.begin(), cuts.end());
    std::vector<Index> widths;
    for (std::size_t i = 1; i < cuts.size(); ++i) widths.push_back(cuts[i] - cuts[i - 1]);
    return widths;
}

// Places disjoint column intervals of the given widths inside [0, n2) by
// rejection; returns the selected column indices.
std::vector<Index> place_intervals(Index n2, const std::vector<Index>& widths, Rng& rng) {
    constexpr int kMaxAttempts = 1000;
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        std::vector<std::pair<Index, Index>> intervals;  // [start, end)
        bool ok = true;
        for (Index w : widths) {
            const Index start = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n2 - w + 1)));
            const Index end = start + w;
            for (const auto& [s0, e0] : intervals) {
                if (start < e0 && s0 < end) {
                    ok = false;
                    break;
                }
            }
            if (!ok) break;
            intervals.emplace_back(start, end);
        }
        if (!ok) continue;
        std::vector<Index> cols;
        for (const auto& [s0, e0] : intervals) {
            for (Index c = s0; c < e0; ++c) cols.push_back(c);
        }
        return cols;
    }
    throw std::runtime_error("gen_deadline_mask: could not place disjoint deadlines");
}

}  // namespace

Mask gen_deadline_mask(const Dims& dims, const std::array<double, 4>& group_rates,
                       std::uint64_t seed) {
    for (double r : group_rates) check_rate(r);
    const Index n1 = dims[0], n2 = dims[1], n3 = dims[2];
    Mask mask(n1, n2, n3, true);
    Rng rng(seed);

    const Index group_size = n3 / 4;  // remainder bands go to the last group
    for (int g = 0; g < 4; ++g) {
        const Index band_begin = g * group_size;
        const Index band_end = (g == 3) ? n3 : (g + 1) * group_size;
        const Index total_width = std::llround(group_rates[static_cast<std::size_t>(g)] *
                                               static_cast<double>(n2));
        if (total_width == 0) continue;
        if (total_width > n2) throw std::invalid_argument("gen_deadline_mask: rate too large");

        Index deadlines = 6 + static_cast<Index>(rng.below(5));  // {6..10}
        if (deadlines > total_width) deadlines = total_width;    // fall back to thinner patterns

        const std::vector<Index> widths =
            (deadlines == 1) ? std::vector<Index>{total_width}
                             : random_composition(total_width, deadlines, rng);
        for (Index col : place_intervals(n2, widths, rng)) {
            for (Index s = band_begin; s < band_end; ++s)
                for (Index l = 0; l < n1; ++l) mask.set(l, col, s, false);
        }
    }
    return mask;
}

Mask gen_mixed_mask(const Dims& dims, double point_mr, double stripe_mr,
                    const std::array<double, 4>& group_rates, std::uint64_t seed) {
    const Mask point = gen_point_mask(dims, point_mr, seed + 1);
    const Mask stripe = gen_stripe_mask(dims, stripe_mr, seed + 2);
    const Mask deadline = gen_deadline_mask(dims, group_rates, seed + 3);
    Mask mask(dims[0], dims[1], dims[2], true);
    for (std::size_t i = 0; i < mask.size(); ++i) {
        const bool observed = point.observed_flat(i) && stripe.observed_flat(i) &&
                              deadline.observed_flat(i);
        mask.set_flat(i, observed);
    }
    return mask;
}

Mask gen_mixed_mask(const Dims& dims, std::uint64_t seed) {
    return gen_mixed_mask(dims, 0.9, 0.1, {0.2, 0.1, 0.3, 0.4}, seed);
}

Mask generate_mask(const Dims& dims, const DegradeSpec& spec) {
    spec.validate();
    switch (spec.kind) {
        case DegradeSpec::Case::point: return gen_point_mask(dims, spec.mr, spec.seed);
        case DegradeSpec::Case::stripe: return gen_stripe_mask(dims, spec.mr, spec.seed);
        case DegradeSpec::Case::deadline:
            return gen_deadline_mask(dims, spec.group_rates, spec.seed);
        default:
            return gen_mixed_mask(dims, spec.point_mr, spec.stripe_mr, spec.group_rates,
                                  spec.seed);
    }
}

}  // namespace deeprep
