#pragma once

#include <stdexcept>
#include <string>

namespace hfio {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A parameter lies outside the numerically supported range (p endpoints,
/// non power-of-two grids, non-unit directions, ...).
class DomainError : public Error {
public:
  using Error::Error;
};

/// A field's Fourier support violates an operation's precondition.
class SupportError : public Error {
public:
  using Error::Error;
};

/// A discretization is too coarse for the requested quantity.
class ResolutionError : public Error {
public:
  using Error::Error;
};

/// Fields or atlases live on incompatible grids.
class GridMismatch : public Error {
public:
  using Error::Error;
};

/// A requested computation exceeds the configured resource caps.
class ResourceLimit : public Error {
public:
  using Error::Error;
};

inline void require(bool ok, const std::string& what) {
  if (!ok) throw DomainError(what);
}

}  // namespace hfio
