#pragma once

#include <stdexcept>
#include <string>

namespace dscm {

/// Base class for every domain error raised by the library. The CLI maps
/// these to exit code 1.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UnknownNode : public Error {
public:
    explicit UnknownNode(const std::string& name) : Error("unknown node '" + name + "'") {}
};

class InvalidGraph : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

class UnsolvableSystem : public Error {
public:
    using Error::Error;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

}  // namespace dscm
