#pragma once

#include <stdexcept>
#include <string>

#include "ueq/ast.hpp"

namespace ueq {

class PositionedError : public std::runtime_error {
 public:
   PositionedError(const std::string& kind, const std::string& message, SourcePos pos)
       : std::runtime_error(kind + " at " + std::to_string(pos.line) + ":" + std::to_string(pos.col) + ": " + message),
         pos_(pos),
         message_(message) {}

   SourcePos pos() const { return pos_; }
   const std::string& message() const { return message_; }

 private:
   SourcePos pos_;
   std::string message_;
};

class ParseError : public PositionedError {
 public:
   ParseError(const std::string& message, SourcePos pos) : PositionedError("syntax error", message, pos) {}
};

class SemanticError : public PositionedError {
 public:
   SemanticError(const std::string& message, SourcePos pos = {}) : PositionedError("error", message, pos) {}
};

/// Raised when a node-count, step or time budget runs out.
class ResourceExhausted : public std::runtime_error {
 public:
   using std::runtime_error::runtime_error;
};

} // namespace ueq
