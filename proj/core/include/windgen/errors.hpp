#pragma once

#include <stdexcept>
#include <string>

namespace windgen {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
	using std::runtime_error::runtime_error;
};

/// Malformed input file, schema violation or inconsistent dimensions.
class DataError : public Error {
public:
	using Error::Error;
};

/// Invalid option or argument value.
class ConfigError : public Error {
public:
	using Error::Error;
};

/// Singular systems, non-convergence, unstable dynamics.
class NumericalError : public Error {
public:
	using Error::Error;
};

}  // namespace windgen
