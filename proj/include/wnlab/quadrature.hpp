#pragma once

#include <functional>

namespace wnlab {

//! Composite Simpson rule; `intervals` is rounded up to an even number.
double simpson(const std::function<double(double)>& f,
               double a,
               double b,
               int intervals = 1 << 14);

} // namespace wnlab
