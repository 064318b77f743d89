#include "satkit/cnf.hpp"
#include "satkit/errors.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace satkit {

namespace {

struct Cursor {
  std::string_view text;
  size_t pos = 0;
  size_t line = 1;

  bool eof() const { return pos >= text.size(); }
  char peek() const { return text[pos]; }
  void advance() {
    if (text[pos] == '\n')
      ++line;
    ++pos;
  }
  void skip_space_and_comments() {
    while (!eof()) {
      char ch = peek();
      if (ch == 'c' && at_line_start_) {
        while (!eof() && peek() != '\n')
          advance();
      } else if (ch == ' ' || ch == '\t' || ch == '\r' || ch == '\n') {
        at_line_start_ = ch == '\n';
        advance();
      } else {
        at_line_start_ = false;
        break;
      }
    }
  }
  // Comments are recognized at the start of a line only.
  bool at_line_start_ = true;
};

long long parse_int(Cursor &cur, const char *what) {
  cur.skip_space_and_comments();
  if (cur.eof())
    throw ParseError(std::string("expected ") + what + ", got end of input",
                     cur.line);
  size_t start = cur.pos;
  if (cur.peek() == '-')
    cur.advance();
  size_t digits = 0;
  while (!cur.eof() && cur.peek() >= '0' && cur.peek() <= '9') {
    cur.advance();
    ++digits;
  }
  if (digits == 0)
    throw ParseError(std::string("expected ") + what, cur.line);
  long long value = 0;
  auto res = std::from_chars(cur.text.data() + start,
                             cur.text.data() + cur.pos, value);
  if (res.ec != std::errc())
    throw ParseError(std::string("number too large for ") + what, cur.line);
  return value;
}

} // namespace

CnfInstance parse_dimacs(std::string_view text, const DimacsOptions &opts) {
  Cursor cur{text};
  cur.skip_space_and_comments();
  if (cur.eof() || cur.peek() != 'p')
    throw ParseError("expected 'p cnf' header", cur.line);
  static constexpr std::string_view kHeader = "p cnf";
  if (text.substr(cur.pos, kHeader.size()) != kHeader)
    throw ParseError("malformed header, expected 'p cnf n m'", cur.line);
  for (size_t i = 0; i < kHeader.size(); ++i)
    cur.advance();

  long long n = parse_int(cur, "variable count");
  long long m = parse_int(cur, "clause count");
  if (n < 0 || m < 0)
    throw ParseError("negative header counts", cur.line);

  std::vector<Clause> clauses;
  Clause current;
  for (;;) {
    cur.skip_space_and_comments();
    if (cur.eof())
      break;
    size_t line = cur.line;
    long long lit = parse_int(cur, "literal");
    if (lit == 0) {
      clauses.push_back(current);
      current.clear();
      continue;
    }
    long long var = lit < 0 ? -lit : lit;
    if (var > n)
      throw ParseError("literal out of range", line);
    current.push_back(Lit(static_cast<int>(lit)));
  }
  if (!current.empty())
    throw ParseError("unterminated clause (missing trailing 0)", cur.line);
  if (static_cast<long long>(clauses.size()) != m && !opts.allow_count_mismatch)
    throw ParseError("clause count mismatch: header says " + std::to_string(m) +
                         ", found " + std::to_string(clauses.size()),
                     cur.line);
  return CnfInstance(static_cast<int>(n), std::move(clauses));
}

CnfInstance parse_dimacs_file(const std::string &path,
                              const DimacsOptions &opts) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error("cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_dimacs(buf.str(), opts);
}

std::string write_dimacs(const CnfInstance &instance) {
  std::string out;
  out += "p cnf " + std::to_string(instance.num_vars()) + " " +
         std::to_string(instance.num_clauses()) + "\n";
  for (const Clause &c : instance.clauses()) {
    for (Lit l : c) {
      out += std::to_string(l.dimacs());
      out += ' ';
    }
    out += "0\n";
  }
  return out;
}

void write_dimacs_file(const CnfInstance &instance, const std::string &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error("cannot write '" + path + "'");
  out << write_dimacs(instance);
}

} // namespace satkit
