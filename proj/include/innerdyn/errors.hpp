#pragma once

#include <stdexcept>
#include <string>

namespace innerdyn {

// Exit-code-2 family: the caller handed us something the operation is not
// defined for. Exit-code-3 family: the inputs were legal but the computation
// could not be completed to the promised accuracy.

struct precondition_error : std::runtime_error {
  explicit precondition_error(const std::string& what) : std::runtime_error(what) {}
};

struct domain_error : precondition_error {
  explicit domain_error(const std::string& what) : precondition_error(what) {}
};

struct unsupported_error : precondition_error {
  explicit unsupported_error(const std::string& what) : precondition_error(what) {}
};

struct numeric_error : std::runtime_error {
  explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

struct conditioning_error : numeric_error {
  explicit conditioning_error(const std::string& what) : numeric_error(what) {}
};

struct resource_error : numeric_error {
  explicit resource_error(const std::string& what) : numeric_error(what) {}
};

}
