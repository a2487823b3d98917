#pragma once

#include <stdexcept>
#include <string>

namespace nembrane {

// Base class for all library errors so callers can catch one type.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Input fails a documented precondition or value-range check.
class ValidationError : public Error {
public:
    using Error::Error;
};

// Config-file syntax problem; message carries the line number.
class ParseError : public Error {
public:
    using Error::Error;
};

// An iterative scheme hit its iteration cap before reaching tolerance.
class NoConvergence : public Error {
public:
    using Error::Error;
};

// lift_director called on a tensor that is not uniaxial within tolerance.
class NotUniaxial : public Error {
public:
    using Error::Error;
};

// Lamination period is undefined because the smallest eigenvalue sits at -1/3.
class DegenerateCase : public Error {
public:
    using Error::Error;
};

// A target outside the biaxial set where membership is a precondition.
class NotBiaxial : public Error {
public:
    using Error::Error;
};

// Sample point outside the tiled box.
class OutOfDomain : public Error {
public:
    using Error::Error;
};

// A cell pair whose gradient jump is not rank-one compatible.
class IncompatiblePair : public Error {
public:
    using Error::Error;
};

// Offset propagation closed a lattice loop with a mismatch above tolerance.
class InconsistentLoop : public Error {
public:
    using Error::Error;
};

// Mollification width exceeds what the cell geometry can accommodate.
class DeltaTooLarge : public Error {
public:
    using Error::Error;
};

// Quadrature grid too coarse to resolve the oscillation scale.
class ResolutionTooCoarse : public Error {
public:
    using Error::Error;
};

// Cutoff collar width incompatible with the domain size.
class RhoTooLarge : public Error {
public:
    using Error::Error;
};

// Nodal vector whose length disagrees with the mesh it is paired with.
class MeshMismatch : public Error {
public:
    using Error::Error;
};

// Membrane solve without any Dirichlet constraint or load compatibility.
class SingularSystem : public Error {
public:
    using Error::Error;
};

}  // namespace nembrane
