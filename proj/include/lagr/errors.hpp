#pragma once

#include <stdexcept>
#include <string>

namespace lagr {

enum class ErrorKind {
    Input,                   // bad argument values / dimension mismatch
    Config,                  // unsatisfiable configuration
    DegenerateNeighborhood,  // no usable observations inside the kernel support
    SingularDesign,          // rank-deficient local design beyond the jitter policy
    Numerical,               // root finding / factorization failure
    NonConvergence,          // iterative fit diverged
    Tuning,                  // every candidate on the tuning path failed
    Schema,                  // missing column in an input file
    Parse,                   // malformed value in an input file
    Io,                      // filesystem failure
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
    throw Error(kind, what);
}

}  // namespace lagr
