#include "lichflow/coefficient.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>
#include <variant>

#include "lichflow/error.hpp"
#include "lichflow/io.hpp"

namespace lichflow {

struct CoefficientSpec::Node {
  enum class Kind { Number, X, Y, Sin, Cos, Neg, Add, Sub, Mul };
  Kind kind = Kind::Number;
  double value = 0.0;
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;
};

namespace {

using Node = CoefficientSpec::Node;
using NodePtr = std::shared_ptr<const Node>;

NodePtr leaf(Node::Kind kind, double value = 0.0) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->value = value;
  return n;
}

NodePtr unary(Node::Kind kind, NodePtr arg) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->lhs = std::move(arg);
  return n;
}

NodePtr binary(Node::Kind kind, NodePtr lhs, NodePtr rhs) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

const std::vector<std::string>& factor_starts() {
  static const std::vector<std::string> s{"number", "'x'", "'y'", "'pi'", "'sin'", "'cos'", "'('", "'-'"};
  return s;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  NodePtr parse() {
    NodePtr root = expr();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input", {"'+'", "'-'", "'*'", "end of input"});
    return root;
  }

 private:
  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      skip_ws();
      if (accept('+')) {
        lhs = binary(Node::Kind::Add, lhs, term());
      } else if (accept('-')) {
        lhs = binary(Node::Kind::Sub, lhs, term());
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    NodePtr lhs = unary_expr();
    for (;;) {
      skip_ws();
      if (!accept('*')) return lhs;
      lhs = binary(Node::Kind::Mul, lhs, unary_expr());
    }
  }

  NodePtr unary_expr() {
    skip_ws();
    if (accept('-')) return unary(Node::Kind::Neg, unary_expr());
    return factor();
  }

  NodePtr factor() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of input", factor_starts());
    const char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (accept('(')) {
      NodePtr inner = expr();
      expect(')');
      return inner;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      const std::string_view ident = text_.substr(start, pos_ - start);
      if (ident == "x") return leaf(Node::Kind::X);
      if (ident == "y") return leaf(Node::Kind::Y);
      if (ident == "pi") return leaf(Node::Kind::Number, std::numbers::pi);
      if (ident == "sin" || ident == "cos") {
        skip_ws();
        expect('(');
        NodePtr arg = expr();
        expect(')');
        return unary(ident == "sin" ? Node::Kind::Sin : Node::Kind::Cos, arg);
      }
      pos_ = start;
      fail("unknown identifier '" + std::string(ident) + "'", {"'x'", "'y'", "'pi'", "'sin'", "'cos'"});
    }
    fail("unexpected character '" + std::string(1, c) + "'", factor_starts());
  }

  NodePtr number() {
    double value = 0.0;
    const char* first = text_.data() + pos_;
    const char* last = text_.data() + text_.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || !std::isfinite(value)) fail("malformed number", {"number"});
    pos_ += static_cast<std::size_t>(ptr - first);
    return leaf(Node::Kind::Number, value);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'", {std::string("'") + c + "'"});
  }

  [[noreturn]] void fail(const std::string& msg, std::vector<std::string> expected) {
    std::ostringstream os;
    os << "syntax error at offset " << pos_ << ": " << msg << " (expected one of:";
    for (const auto& e : expected) os << ' ' << e;
    os << ") in \"" << text_ << '"';
    throw ParseError(os.str(), pos_, std::move(expected));
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

double eval(const Node& n, double x, double y) {
  switch (n.kind) {
    case Node::Kind::Number: return n.value;
    case Node::Kind::X: return x;
    case Node::Kind::Y: return y;
    case Node::Kind::Sin: return std::sin(eval(*n.lhs, x, y));
    case Node::Kind::Cos: return std::cos(eval(*n.lhs, x, y));
    case Node::Kind::Neg: return -eval(*n.lhs, x, y);
    case Node::Kind::Add: return eval(*n.lhs, x, y) + eval(*n.rhs, x, y);
    case Node::Kind::Sub: return eval(*n.lhs, x, y) - eval(*n.rhs, x, y);
    case Node::Kind::Mul: return eval(*n.lhs, x, y) * eval(*n.rhs, x, y);
  }
  return 0.0;
}

bool mentions(const Node& n, Node::Kind kind) {
  if (n.kind == kind) return true;
  return (n.lhs && mentions(*n.lhs, kind)) || (n.rhs && mentions(*n.rhs, kind));
}

void sexpr(const Node& n, std::ostream& os) {
  switch (n.kind) {
    case Node::Kind::Number: os << io::format_double(n.value); return;
    case Node::Kind::X: os << 'x'; return;
    case Node::Kind::Y: os << 'y'; return;
    case Node::Kind::Sin: os << "(sin "; sexpr(*n.lhs, os); os << ')'; return;
    case Node::Kind::Cos: os << "(cos "; sexpr(*n.lhs, os); os << ')'; return;
    case Node::Kind::Neg: os << "(- "; sexpr(*n.lhs, os); os << ')'; return;
    case Node::Kind::Add:
    case Node::Kind::Sub:
    case Node::Kind::Mul: {
      const char op = n.kind == Node::Kind::Add ? '+' : n.kind == Node::Kind::Sub ? '-' : '*';
      os << '(' << op << ' ';
      sexpr(*n.lhs, os);
      os << ' ';
      sexpr(*n.rhs, os);
      os << ')';
      return;
    }
  }
}

constexpr std::string_view kFilePrefix = "@file:";

}  // namespace

CoefficientSpec CoefficientSpec::parse(std::string_view text) {
  CoefficientSpec spec;
  spec.text_ = std::string(text);
  std::string_view trimmed = text;
  while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.front()))) trimmed.remove_prefix(1);
  while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.back()))) trimmed.remove_suffix(1);
  if (trimmed.starts_with(kFilePrefix)) {
    spec.file_ = std::string(trimmed.substr(kFilePrefix.size()));
    if (spec.file_.empty()) throw ParseError("@file: needs a path", kFilePrefix.size(), {"path"});
    return spec;
  }
  spec.root_ = Parser(text).parse();
  return spec;
}

CoefficientSpec CoefficientSpec::constant(double value) {
  CoefficientSpec spec;
  spec.text_ = io::format_double(value);
  spec.root_ = leaf(Node::Kind::Number, value);
  return spec;
}

bool CoefficientSpec::uses_y() const noexcept { return root_ && mentions(*root_, Node::Kind::Y); }

bool CoefficientSpec::is_constant() const noexcept {
  return root_ && !mentions(*root_, Node::Kind::X) && !mentions(*root_, Node::Kind::Y);
}

double CoefficientSpec::evaluate(double x, double y) const {
  if (!root_) throw Error("tabulated coefficient '" + file_ + "' has no closed form");
  return eval(*root_, x, y);
}

std::string CoefficientSpec::to_sexpr() const {
  if (!root_) return "(file " + file_ + ")";
  std::ostringstream os;
  sexpr(*root_, os);
  return os.str();
}

Field materialize(const CoefficientSpec& spec, const Grid& grid) {
  if (spec.is_tabulated()) {
    Field f = io::read_snapshot(spec.file());
    if (!(f.grid() == grid)) {
      std::ostringstream os;
      os << "tabulated coefficient '" << spec.file() << "' has dim " << f.grid().dim() << " and "
         << f.grid().size() << " points but the target grid has dim " << grid.dim() << " and "
         << grid.size() << " points";
      throw Error(os.str());
    }
    return f;
  }
  if (grid.dim() == 1 && spec.uses_y()) {
    throw Error("coefficient \"" + spec.text() + "\" uses y on a 1-d grid (dimension mismatch)");
  }
  std::vector<double> values(grid.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = spec.evaluate(grid.coordinate(i, 0), grid.coordinate(i, 1));
    if (!std::isfinite(values[i])) {
      throw Error("coefficient \"" + spec.text() + "\" is not finite at grid point " + std::to_string(i));
    }
  }
  return Field(grid, std::move(values));
}

}  // namespace lichflow
