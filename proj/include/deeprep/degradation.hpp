#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "deeprep/tensor.hpp"

namespace deeprep {

// The four simulated missing-data scenarios. All generators are pure
// functions of (dims, spec, seed).
struct DegradeSpec {
    enum class Case { point, stripe, deadline, mixed };

    Case kind = Case::point;
    double mr = 0.9;        // point / stripe missing rate
    double point_mr = 0.9;  // point component of the mixed case
    double stripe_mr = 0.1; // stripe component of the mixed case
    // Deadline rates per consecutive band group, in band-group order.
    // Default follows the illustrated pattern (0.2, 0.1, 0.3, 0.4); the
    // ascending listing (0.1, 0.2, 0.3, 0.4) is a config choice away.
    std::array<double, 4> group_rates{0.2, 0.1, 0.3, 0.4};
    std::uint64_t seed = 0;

    void validate() const;
};

DegradeSpec::Case parse_case(const std::string& name);
std::string case_name(DegradeSpec::Case c);

// Exactly round(mr * n1*n2*n3) entries missing, uniform without replacement.
Mask gen_point_mask(const Dims& dims, double mr, std::uint64_t seed);

// floor(mr * n2) whole lateral slices X(:,j,:) missing.
Mask gen_stripe_mask(const Dims& dims, double mr, std::uint64_t seed);

// Four deadline patterns on four groups of consecutive bands (remainder
// bands go to the last group). Group g loses round(rate_g * n2) columns,
// split into d in {6..10} disjoint intervals of random widths.
Mask gen_deadline_mask(const Dims& dims, const std::array<double, 4>& group_rates,
                       std::uint64_t seed);

// Union of the missing sets of point (mr 0.9), stripe (mr 0.1) and the
// default deadline pattern; component seeds are fixed offsets of `seed`.
Mask gen_mixed_mask(const Dims& dims, std::uint64_t seed);
Mask gen_mixed_mask(const Dims& dims, double point_mr, double stripe_mr,
                    const std::array<double, 4>& group_rates, std::uint64_t seed);

Mask generate_mask(const Dims& dims, const DegradeSpec& spec);

}  // namespace deeprep
