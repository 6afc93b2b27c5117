#pragma once

#include <stdexcept>
#include <string>

namespace bicomb {

// Base class for all library failures; code() is a stable machine-readable tag.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

class MalformedInput : public Error {
 public:
  explicit MalformedInput(const std::string& what) : Error("malformed-input", what) {}
};

class InvalidGluing : public Error {
 public:
  explicit InvalidGluing(const std::string& what) : Error("invalid-gluing", what) {}
};

class SearchExhausted : public Error {
 public:
  explicit SearchExhausted(const std::string& what) : Error("search-exhausted", what) {}
};

class CertificateFailure : public Error {
 public:
  explicit CertificateFailure(const std::string& what) : Error("certificate-failure", what) {}
};

class WindowTooSmall : public Error {
 public:
  explicit WindowTooSmall(const std::string& what) : Error("window-too-small", what) {}
};

class NotSeparated : public Error {
 public:
  explicit NotSeparated(const std::string& what) : Error("not-separated-within-horizon", what) {}
};

class HorizonExceeded : public Error {
 public:
  explicit HorizonExceeded(const std::string& what) : Error("horizon-exceeded", what) {}
};

class NonConvergence : public Error {
 public:
  explicit NonConvergence(const std::string& what) : Error("non-convergence", what) {}
};

}  // namespace bicomb
