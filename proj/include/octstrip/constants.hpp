#pragma once

namespace octstrip {

inline constexpr double speed_of_light = 299792458.0; // m/s
inline constexpr double pi = 3.141592653589793238462643383279502884;

} // namespace octstrip
