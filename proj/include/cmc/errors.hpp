#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

#include "cmc/bitstring.hpp"

namespace cmc {

/// Base of every library error. code() is a stable machine-readable tag.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what) : std::runtime_error(what), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

/// A splitting-node search (or another bounded search) ran past its budget.
class BudgetExceeded : public Error {
 public:
  explicit BudgetExceeded(const std::string& what) : Error("budget-exceeded", what) {}
};

/// splitting_node was asked to start from a cylinder of measure zero.
class ZeroMass : public Error {
 public:
  explicit ZeroMass(const Bitstring& s)
      : Error("zero-mass", "cylinder '" + s.str() + "' has measure zero"), where_(s) {}
  const Bitstring& where() const { return where_; }

 private:
  Bitstring where_;
};

/// A measure code whose k-th spine split is neither 2/3:1/3 nor 1/3:2/3.
class NotInCodingDomain : public Error {
 public:
  NotInCodingDomain(std::size_t index, Bitstring node)
      : Error("not-in-coding-domain",
              "spine node " + std::to_string(index) + " ('" + node.str() + "') carries no payload bit"),
        index_(index),
        node_(std::move(node)) {}
  std::size_t index() const { return index_; }
  const Bitstring& node() const { return node_; }

 private:
  std::size_t index_;
  Bitstring node_;
};

/// The code contains an oracle with no finite description.
class NotSerializable : public Error {
 public:
  explicit NotSerializable(const std::string& what) : Error("not-serializable", what) {}
};

/// Well-formed input that does not describe a probability measure code.
class SemanticError : public Error {
 public:
  explicit SemanticError(const std::string& what) : Error("semantic-error", what) {}
};

}  // namespace cmc
