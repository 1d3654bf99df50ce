#pragma once

#include <stdexcept>
#include <string>

namespace gouy {

// Input that violates a documented precondition or invariant.
class invalid_input : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// |C*q + D| vanished: the beam is focused to a point exactly at the evaluation plane.
class singular_propagation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class quadrature_error : public std::runtime_error {
public:
    quadrature_error(const std::string& what, double achieved, double requested)
        : std::runtime_error(what + " (achieved error " + std::to_string(achieved) +
                             ", requested " + std::to_string(requested) + ")"),
          achieved_error(achieved),
          requested_error(requested) {}

    double achieved_error;
    double requested_error;
};

class optimization_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace gouy
