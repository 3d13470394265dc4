#pragma once

#include <stdexcept>
#include <string>

namespace wnlab {

//! Thrown when a bandwidth is too small for the grid to resolve.
class ResolutionError : public std::invalid_argument
{
public:
  ResolutionError(const std::string& what, int level)
    : std::invalid_argument(what)
    , level_(level)
  {}
  int level() const { return level_; }

private:
  int level_;
};

class GridMismatch : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

//! A zone-specific quantity was requested for a parameter set in another zone.
class ZoneMismatch : public std::domain_error
{
public:
  using std::domain_error::domain_error;
};

//! The requested noise level leaves no admissible construction.
class InfeasibleError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

} // namespace wnlab
