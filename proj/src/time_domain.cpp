#include "ned/time_domain.hpp"

#include "ned/errors.hpp"

namespace ned {

bool contains(TimeDomain d, double t) {
    switch (d) {
        case TimeDomain::Full: return true;
        case TimeDomain::Plus: return t >= 0.0;
        case TimeDomain::Minus: return t <= 0.0;
    }
    return false;
}

bool contains(TimeDomain outer, TimeDomain inner) {
    return outer == TimeDomain::Full || outer == inner;
}

bool is_half_line(TimeDomain d) { return d != TimeDomain::Full; }

std::string to_string(TimeDomain d) {
    switch (d) {
        case TimeDomain::Full: return "full";
        case TimeDomain::Plus: return "plus";
        case TimeDomain::Minus: return "minus";
    }
    return "full";
}

TimeDomain parse_domain(const std::string& s) {
    if (s == "full" || s == "R") return TimeDomain::Full;
    if (s == "plus" || s == "R+") return TimeDomain::Plus;
    if (s == "minus" || s == "R-") return TimeDomain::Minus;
    throw ArgumentError("unknown time domain '" + s + "' (expected full|plus|minus)");
}

}  // namespace ned
