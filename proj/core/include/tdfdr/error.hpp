#pragma once

#include <stdexcept>
#include <string>

namespace tdfdr {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller-supplied argument is out of its documented range.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Both groups of a test have zero spread, so a pooled t statistic is undefined.
class DegenerateVariance : public Error {
public:
    using Error::Error;
};

/// Input data does not satisfy a dataset invariant (malformed row, empty matrix, ...).
class DataError : public Error {
public:
    using Error::Error;
};

/// Filesystem failure; the message carries the offending path.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace tdfdr
