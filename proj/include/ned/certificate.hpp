#pragma once

#include <memory>
#include <optional>
#include <string>

#include "ned/process.hpp"
#include "ned/time_domain.hpp"

namespace ned {

enum class Kind { I, II };
std::string to_string(Kind k);
Kind parse_kind(const std::string& s);
inline Kind swapped(Kind k) { return k == Kind::I ? Kind::II : Kind::I; }

// (alpha, delta) for the stable part, (beta, nu) for the unstable part.
struct ExponentPair {
    double rate = 0.0;
    double growth = 0.0;
    bool operator==(const ExponentPair&) const = default;
};

struct DichotomyCertificate {
    Kind kind = Kind::II;
    TimeDomain domain = TimeDomain::Full;
    double M = 1.0;
    ExponentPair stable;
    std::optional<ExponentPair> unstable;
    ProjectionKind projection = ProjectionKind::Zero;
    // Needed to check certificates whose projection is explicit.
    std::shared_ptr<const ProjectionFamily> family;
    // Set by convert_halfline so that converting back returns this source exactly.
    std::shared_ptr<const DichotomyCertificate> converted_from;

    double upsilon() const;  // max(delta, nu)
    double omega() const;    // min(alpha, beta)
    ProjectionFamily projections(int dim) const;
    // Checks M >= 1, alpha > 0, delta >= 0 and the unstable analogue.
    void validate() const;
};

bool same_bounds(const DichotomyCertificate& a, const DichotomyCertificate& b);

}  // namespace ned
