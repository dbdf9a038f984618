#pragma once

#include <cctype>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "satevo/cnf.hpp"

namespace satevo {

/// Error raised on malformed DIMACS input; carries the 1-based line number.
class DimacsParseError : public std::runtime_error {
 public:
  DimacsParseError(std::uint64_t line, const std::string& message)
      : std::runtime_error("dimacs parse error at line " +
                           std::to_string(line) + ": " + message),
        line_(line) {}

  std::uint64_t line() const { return line_; }

 private:
  std::uint64_t line_;
};

namespace detail {

// Whitespace-separated token scanner that tracks line numbers and skips
// comment lines ('c' at the start of a line).
class DimacsScanner {
 public:
  explicit DimacsScanner(std::istream& in) : in_(in) {}

  // Returns false at end of input.
  bool next_token(std::string& token) {
    token.clear();
    int ch;
    while ((ch = get()) != EOF) {
      if (ch == '\n') {
        at_line_start_ = true;
        ++line_;
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(ch))) continue;
      if (at_line_start_ && ch == 'c') {
        while ((ch = get()) != EOF && ch != '\n') {
        }
        if (ch == '\n') ++line_;
        continue;
      }
      break;
    }
    if (ch == EOF) return false;
    at_line_start_ = false;
    do {
      token.push_back(static_cast<char>(ch));
      ch = get();
    } while (ch != EOF && !std::isspace(static_cast<unsigned char>(ch)));
    if (ch == '\n') {
      at_line_start_ = true;
      ++line_;
    }
    return true;
  }

  std::uint64_t line() const { return line_; }

 private:
  int get() { return in_.get(); }

  std::istream& in_;
  std::uint64_t line_ = 1;
  bool at_line_start_ = true;
};

inline int parse_int_token(const std::string& token, std::uint64_t line) {
  if (token.empty())
    throw DimacsParseError(line, "empty token");
  std::size_t pos = 0;
  int value = 0;
  try {
    value = std::stoi(token, &pos);
  } catch (const std::exception&) {
    throw DimacsParseError(line, "expected integer, got '" + token + "'");
  }
  if (pos != token.size())
    throw DimacsParseError(line, "expected integer, got '" + token + "'");
  return value;
}

}  // namespace detail

/// Parses standard DIMACS CNF: 'c' comment lines, a "p cnf <n> <m>" header,
/// then clauses as nonzero integers terminated by 0 (clauses may span
/// lines). The variable count comes from the header. A clause-count mismatch
/// against the header is tolerated with a warning; the clauses actually read
/// win. Empty clauses (a bare "0") are kept. A repeated variable within one
/// clause, a variable index beyond the header, a missing header, or a
/// non-integer token are errors carrying the offending line number.
inline CnfFormula parse_dimacs(std::istream& in,
                               std::vector<std::string>* warnings = nullptr) {
  detail::DimacsScanner scanner(in);
  std::string token;

  if (!scanner.next_token(token))
    throw DimacsParseError(scanner.line(), "missing 'p cnf' header");
  if (token != "p")
    throw DimacsParseError(scanner.line(),
                           "missing 'p cnf' header, got '" + token + "'");
  if (!scanner.next_token(token) || token != "cnf")
    throw DimacsParseError(scanner.line(), "header format is not 'p cnf'");
  if (!scanner.next_token(token))
    throw DimacsParseError(scanner.line(), "header missing variable count");
  const int num_variables = detail::parse_int_token(token, scanner.line());
  if (num_variables < 0)
    throw DimacsParseError(scanner.line(), "negative variable count");
  if (!scanner.next_token(token))
    throw DimacsParseError(scanner.line(), "header missing clause count");
  const int declared_clauses = detail::parse_int_token(token, scanner.line());
  if (declared_clauses < 0)
    throw DimacsParseError(scanner.line(), "negative clause count");

  CnfFormula formula;
  formula.num_variables = num_variables;
  Clause clause;
  bool in_clause = false;
  while (scanner.next_token(token)) {
    const int code = detail::parse_int_token(token, scanner.line());
    if (code == 0) {
      formula.clauses.push_back(std::move(clause));
      clause = Clause{};
      in_clause = false;
      continue;
    }
    const Lit lit = Lit::from_dimacs(code);
    if (lit.variable() > num_variables)
      throw DimacsParseError(scanner.line(),
                             "variable " + std::to_string(lit.variable()) +
                                 " out of range [1, " +
                                 std::to_string(num_variables) + "]");
    if (clause.contains_variable(lit.variable()))
      throw DimacsParseError(scanner.line(),
                             "variable " + std::to_string(lit.variable()) +
                                 " occurs twice in one clause");
    clause.literals.push_back(lit);
    in_clause = true;
  }
  if (in_clause)
    throw DimacsParseError(scanner.line(),
                           "unterminated clause at end of input");
  if (warnings &&
      formula.clauses.size() != static_cast<std::size_t>(declared_clauses))
    warnings->push_back("header declares " +
                        std::to_string(declared_clauses) + " clauses but " +
                        std::to_string(formula.clauses.size()) +
                        " were read; using the clauses read");
  return formula;
}

inline CnfFormula parse_dimacs(const std::string& text,
                               std::vector<std::string>* warnings = nullptr) {
  std::istringstream in(text);
  return parse_dimacs(in, warnings);
}

/// Writes "p cnf n m" then one line per clause in stored order, literals as
/// signed integers, each clause terminated by " 0" (a bare "0" for an empty
/// clause).
inline void write_dimacs(const CnfFormula& formula, std::ostream& out) {
  out << "p cnf " << formula.num_variables << ' ' << formula.clauses.size()
      << '\n';
  for (const Clause& clause : formula.clauses) {
    for (Lit lit : clause.literals) out << lit.dimacs() << ' ';
    out << "0\n";
  }
}

inline std::string write_dimacs(const CnfFormula& formula) {
  std::ostringstream out;
  write_dimacs(formula, out);
  return out.str();
}

}  // namespace satevo
