#include "ned/certificate.hpp"

#include <algorithm>
#include <cmath>

#include "ned/errors.hpp"

namespace ned {

std::string to_string(Kind k) { return k == Kind::I ? "I" : "II"; }

Kind parse_kind(const std::string& s) {
    if (s == "I" || s == "1" || s == "NEDI") return Kind::I;
    if (s == "II" || s == "2" || s == "NEDII") return Kind::II;
    throw ArgumentError("unknown dichotomy kind '" + s + "' (expected I or II)");
}

double DichotomyCertificate::upsilon() const {
    double u = stable.growth;
    if (unstable) u = std::max(u, unstable->growth);
    return u;
}

double DichotomyCertificate::omega() const {
    double w = stable.rate;
    if (unstable) w = std::min(w, unstable->rate);
    return w;
}

ProjectionFamily DichotomyCertificate::projections(int dim) const {
    if (projection == ProjectionKind::Explicit) {
        if (!family) throw ArgumentError("explicit projection certificate carries no family");
        return *family;
    }
    return ProjectionFamily::of_kind(projection, dim);
}

void DichotomyCertificate::validate() const {
    if (!(M >= 1.0) || !std::isfinite(M)) throw ArgumentError("certificate needs finite M >= 1");
    if (!(stable.rate > 0.0)) throw ArgumentError("certificate needs alpha > 0");
    if (!(stable.growth >= 0.0)) throw ArgumentError("certificate needs delta >= 0");
    if (unstable) {
        if (!(unstable->rate > 0.0)) throw ArgumentError("certificate needs beta > 0");
        if (!(unstable->growth >= 0.0)) throw ArgumentError("certificate needs nu >= 0");
    }
    if (projection != ProjectionKind::Zero && !unstable)
        throw ArgumentError("a nonzero unstable projection needs an unstable pair");
}

bool same_bounds(const DichotomyCertificate& a, const DichotomyCertificate& b) {
    return a.kind == b.kind && a.domain == b.domain && a.M == b.M && a.stable == b.stable &&
           a.unstable == b.unstable && a.projection == b.projection;
}

}  // namespace ned
