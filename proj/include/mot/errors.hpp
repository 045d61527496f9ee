#ifndef MOT_ERRORS_HPP
#define MOT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mot {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: bad parameters, unsorted grids, weights that do not sum to one.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Instance or certificate text that cannot be read; the message names the
/// offending field or line.
class ParseError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// Tensor or table shapes disagree with the marginal grids.
class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

/// An envelope was evaluated outside its hull. On a validated instance this
/// cannot happen, so it indicates marginal supports that are not nested.
class OutOfDomain : public Error {
 public:
  using Error::Error;
};

/// A configured size limit (LP variables, enumeration budget) was exceeded.
class CapExceeded : public Error {
 public:
  using Error::Error;
};

}  // namespace mot

#endif  // MOT_ERRORS_HPP
