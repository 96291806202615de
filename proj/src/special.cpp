#include "ckn/special.hpp"

// Explicit instantiations for the two precision modes used by the library
// and its oracle cross-checks.
namespace ckn {
template double gamma_positive<double>(double);
template long double gamma_positive<long double>(long double);
template double unit_ball_volume_t<double>(int);
template long double unit_ball_volume_t<long double>(int);
} // namespace ckn
