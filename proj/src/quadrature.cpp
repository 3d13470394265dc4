#include "wnlab/quadrature.hpp"

namespace wnlab {

double simpson(const std::function<double(double)>& f, double a, double b, int intervals)
{
  if (intervals % 2)
    ++intervals;
  const double h = (b - a) / intervals;
  double s = f(a) + f(b);
  for (int i = 1; i < intervals; ++i)
    s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

} // namespace wnlab
