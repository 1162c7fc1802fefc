#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tdiff {

// Base class for every error thrown by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class DimensionMismatch : public Error {
 public:
  explicit DimensionMismatch(const std::string& what) : Error(what) {}
};

class ContractViolation : public Error {
 public:
  explicit ContractViolation(const std::string& what) : Error(what) {}
};

// Cholesky factorization hit a non-positive pivot; carries the pivot index.
class NotPositiveDefinite : public Error {
 public:
  NotPositiveDefinite(const std::string& what, std::size_t pivot)
      : Error(what), pivot_index(pivot) {}
  std::size_t pivot_index;
};

// An iterative routine exceeded its iteration cap.
class NonConvergence : public Error {
 public:
  explicit NonConvergence(const std::string& what) : Error(what) {}
};

class DegenerateVector : public Error {
 public:
  explicit DegenerateVector(const std::string& what) : Error(what) {}
};

class DegenerateSpectrum : public Error {
 public:
  explicit DegenerateSpectrum(const std::string& what) : Error(what) {}
};

class DegenerateBaseline : public Error {
 public:
  explicit DegenerateBaseline(const std::string& what) : Error(what) {}
};

// Langevin state became non-finite; carries the step index.
class DivergedSimulation : public Error {
 public:
  DivergedSimulation(const std::string& what, std::size_t step)
      : Error(what), step_index(step) {}
  std::size_t step_index;
};

// Training loss became NaN; carries the iteration index.
class DivergedTraining : public Error {
 public:
  DivergedTraining(const std::string& what, std::size_t iteration)
      : Error(what), iteration_index(iteration) {}
  std::size_t iteration_index;
};

class BadMagic : public Error {
 public:
  explicit BadMagic(const std::string& what) : Error(what) {}
};

class VersionMismatch : public Error {
 public:
  explicit VersionMismatch(const std::string& what) : Error(what) {}
};

class TruncatedPayload : public Error {
 public:
  explicit TruncatedPayload(const std::string& what) : Error(what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(what) {}
};

}  // namespace tdiff
