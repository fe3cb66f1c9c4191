#ifndef RODPLAST_ERRORS_HPP
#define RODPLAST_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace rodplast {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// det F <= 0, or a deformation field violating admissibility.
struct DegenerateDeformation : Error {
    using Error::Error;
};

struct InvalidInput : Error {
    using Error::Error;
};

// Rotation logarithm requested at or beyond the angle-pi branch cut.
struct LogBranchCut : Error {
    using Error::Error;
};

struct SolverFailure : Error {
    using Error::Error;
};

} // namespace rodplast

#endif
