#pragma once

#include <iostream>
#include <stdexcept>
#include <string>

namespace partreg {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Rotation6D parameters too close to zero / collinear to build a frame.
struct DegenerateParameters : Error {
    using Error::Error;
};

// A count argument (keypoints, samples, ...) outside its valid range.
struct InvalidCount : Error {
    using Error::Error;
};

// Input geometry cannot support the operation (e.g. collinear plane fit).
struct DegenerateInput : Error {
    using Error::Error;
};

// Operation received an empty collection where at least one element is required.
struct EmptyInput : Error {
    using Error::Error;
};

// Every dictionary candidate produced a degenerate initialization.
struct AllCandidatesFailed : Error {
    using Error::Error;
};

// Hidden point removal left too few points for every viewpoint.
struct EmptyPartition : Error {
    using Error::Error;
};

// Visibility removed every template point while generating a scan.
struct EmptyScan : Error {
    using Error::Error;
};

struct ParseError : Error {
    using Error::Error;
};

struct UnsupportedFormat : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

// Non-fatal conditions (insufficient neighborhoods, dropped viewpoints, ...)
// are reported here; callers that care inspect the flags the operations return.
inline void warn(const std::string& message) {
    std::cerr << "[partreg] warning: " << message << "\n";
}

}  // namespace partreg
