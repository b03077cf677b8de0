#pragma once

#include <string>

namespace ned {

enum class TimeDomain { Full, Plus, Minus };

bool contains(TimeDomain d, double t);
// True when every time in `inner` also lies in `outer`.
bool contains(TimeDomain outer, TimeDomain inner);
bool is_half_line(TimeDomain d);

std::string to_string(TimeDomain d);
TimeDomain parse_domain(const std::string& s);

}  // namespace ned
