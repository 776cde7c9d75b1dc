#pragma once

#include <stdexcept>
#include <string>

namespace irisift {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// File could not be opened or read.
class IoError : public Error {
public:
    using Error::Error;
};

/// File exists but its contents do not parse or violate an invariant.
class FormatError : public Error {
public:
    using Error::Error;
};

/// An argument value is outside its documented domain.
class ParamError : public Error {
public:
    using Error::Error;
};

/// Image (or other container) is too small for the operation.
class SizeError : public Error {
public:
    using Error::Error;
};

/// Index or coordinate outside the valid range.
class BoundsError : public Error {
public:
    using Error::Error;
};

/// Circle detection found no sufficiently supported candidate.
class SegmentationError : public Error {
public:
    using Error::Error;
};

/// Two iris codes share no usable bits at any shift.
class IncomparableCodesError : public Error {
public:
    using Error::Error;
};

/// A manifest or dataset failed consistency checks.
class ValidationError : public Error {
public:
    using Error::Error;
};

} // namespace irisift
