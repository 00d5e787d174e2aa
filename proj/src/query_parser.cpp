#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>
#include <unordered_set>

#include "craql/query.hpp"

namespace craql::query {

namespace {

std::string format_error(const std::string& source, SourceLoc loc, const std::string& message,
                         const std::vector<std::string>& expected) {
  std::string out = source + ":" + std::to_string(loc.line) + ":" + std::to_string(loc.column) + ": " + message;
  if (!expected.empty()) {
    out += " (expected one of:";
    for (const auto& e : expected) out += " " + e;
    out += ")";
  }
  return out;
}

const std::unordered_set<std::string_view> kKeywords = {
    "select", "outmost", "inmost", "directly", "in", "where", "if", "else", "while", "callquery", "true", "false",
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

}  // namespace

SyntaxError::SyntaxError(std::string source, SourceLoc loc, const std::string& message,
                         std::vector<std::string> expected)
    : std::runtime_error(format_error(source, loc, message, expected)),
      source_(std::move(source)),
      loc_(loc),
      expected_(std::move(expected)) {}

//===----------------------------------------------------------------------===//
// Lexer
//===----------------------------------------------------------------------===//

std::vector<Token> tokenize(std::string_view text, const std::string& source) {
  std::vector<Token> out;
  std::size_t pos = 0;
  SourceLoc loc;
  auto advance = [&](std::size_t n = 1) {
    for (std::size_t i = 0; i < n && pos < text.size(); ++i, ++pos) {
      if (text[pos] == '\n') {
        ++loc.line;
        loc.column = 1;
      } else if ((static_cast<unsigned char>(text[pos]) & 0xC0) != 0x80) {
        ++loc.column;
      }
    }
  };

  while (true) {
    while (pos < text.size()) {
      if (std::isspace(static_cast<unsigned char>(text[pos]))) {
        advance();
      } else if (text.substr(pos, 2) == "//") {
        while (pos < text.size() && text[pos] != '\n') advance();
      } else {
        break;
      }
    }
    Token tok;
    tok.loc = loc;
    if (pos >= text.size()) {
      out.push_back(tok);
      return out;
    }
    char c = text[pos];

    if (c == '{') {
      // `{Name}` with no inner whitespace is a node type; anything else opens a block.
      std::size_t end = pos + 1;
      if (end < text.size() && ident_start(text[end])) {
        while (end < text.size() && ident_char(text[end])) ++end;
        if (end < text.size() && text[end] == '}') {
          tok.kind = TokenKind::NodeType;
          tok.text = std::string(text.substr(pos + 1, end - pos - 1));
          advance(end - pos + 1);
          out.push_back(std::move(tok));
          continue;
        }
      }
    }

    if (ident_start(c)) {
      std::size_t end = pos;
      while (end < text.size() && ident_char(text[end])) ++end;
      tok.text = std::string(text.substr(pos, end - pos));
      tok.kind = kKeywords.contains(tok.text) ? TokenKind::Keyword : TokenKind::Identifier;
      advance(end - pos);
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t end = pos;
      while (end < text.size() && std::isdigit(static_cast<unsigned char>(text[end]))) ++end;
      tok.kind = TokenKind::Integer;
      tok.text = std::string(text.substr(pos, end - pos));
      advance(end - pos);
    } else if (c == '"') {
      tok.kind = TokenKind::String;
      advance();
      bool closed = false;
      while (pos < text.size() && text[pos] != '\n') {
        char d = text[pos];
        advance();
        if (d == '"') {
          closed = true;
          break;
        }
        if (d == '\\' && pos < text.size()) {
          char e = text[pos];
          advance();
          switch (e) {
            case 'n': tok.text += '\n'; break;
            case 't': tok.text += '\t'; break;
            case 'r': tok.text += '\r'; break;
            default: tok.text += e; break;
          }
        } else {
          tok.text += d;
        }
      }
      if (!closed) throw SyntaxError(source, tok.loc, "unterminated string literal");
    } else {
      static constexpr std::string_view kOps[] = {"...", "==", "!=", "<=", ">=", "&&", "||", "++", "--", "+=",
                                                   "-=",  "=",  "<",  ">",  "+",  "-",  "*",  "!",  ".",  ",",
                                                   ";",   ":",  "(",  ")",  "{",  "}"};
      auto it = std::find_if(std::begin(kOps), std::end(kOps),
                             [&](std::string_view op) { return text.substr(pos, op.size()) == op; });
      if (it == std::end(kOps)) {
        throw SyntaxError(source, tok.loc, std::string("stray character '") + c + "'");
      }
      tok.kind = TokenKind::Operator;
      tok.text = std::string(*it);
      advance(it->size());
    }
    out.push_back(std::move(tok));
  }
}

//===----------------------------------------------------------------------===//
// Parser
//===----------------------------------------------------------------------===//

namespace {

class Parser {
 public:
  Parser(const std::vector<Token>& tokens, std::string source) : toks_(tokens), source_(std::move(source)) {
    if (toks_.empty() || toks_.back().kind != TokenKind::End) {
      throw SyntaxError(source_, {}, "token stream is not terminated");
    }
  }

  QueryDocument run() {
    QueryDocument doc;
    doc.source = source_;
    std::set<std::string> labels;
    while (peek().kind != TokenKind::End) {
      LabeledQuery lq;
      if (peek().kind == TokenKind::Identifier && is_op(":", 1)) {
        const Token& label = take();
        if (!labels.insert(label.text).second) fail(label.loc, "duplicate label " + label.text);
        lq.label = label.text;
        take();
      }
      if (!is_keyword("select")) fail(peek().loc, "expected a select query", {"select", "label :"});
      lq.query = select();
      doc.queries.push_back(std::move(lq));
    }
    for (const auto& lq : doc.queries) check_labels(lq.query->body, labels);
    return doc;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const { return toks_[std::min(pos_ + ahead, toks_.size() - 1)]; }
  const Token& take() {
    const Token& t = toks_[pos_];
    if (t.kind != TokenKind::End) ++pos_;
    return t;
  }
  bool is_op(std::string_view op, std::size_t ahead = 0) const {
    return peek(ahead).kind == TokenKind::Operator && peek(ahead).text == op;
  }
  bool is_keyword(std::string_view kw) const { return peek().kind == TokenKind::Keyword && peek().text == kw; }

  std::string describe(const Token& t) const {
    switch (t.kind) {
      case TokenKind::End: return "end of input";
      case TokenKind::NodeType: return "'{" + t.text + "}'";
      case TokenKind::String: return "string literal";
      default: return "'" + t.text + "'";
    }
  }

  [[noreturn]] void fail(SourceLoc loc, const std::string& message, std::vector<std::string> expected = {}) const {
    throw SyntaxError(source_, loc, message, std::move(expected));
  }
  [[noreturn]] void unexpected(std::vector<std::string> expected) const {
    fail(peek().loc, "unexpected " + describe(peek()), std::move(expected));
  }

  void expect_op(std::string_view op) {
    if (!is_op(op)) unexpected({"'" + std::string(op) + "'"});
    take();
  }
  std::string expect_ident() {
    if (peek().kind != TokenKind::Identifier) unexpected({"identifier"});
    return take().text;
  }

  // Queries ----------------------------------------------------------------
  std::shared_ptr<const SelectQuery> select() {
    auto q = std::make_shared<SelectQuery>();
    q->loc = take().loc;  // 'select'
    if (is_keyword("outmost")) {
      take();
      q->modifier = Modifier::Outmost;
    } else if (is_keyword("inmost")) {
      take();
      q->modifier = Modifier::Inmost;
    }
    expect_op("(");
    q->pattern.first = pattern_var();
    if (is_op("*") || is_op("...")) {
      q->pattern.kind = take().text == "*" ? PatternKind::Star : PatternKind::Ellipsis;
      q->pattern.second = pattern_var();
      if (q->pattern.second->name == q->pattern.first.name) {
        fail(q->loc, "pattern binds " + q->pattern.first.name + " twice");
      }
      if (q->modifier != Modifier::None) {
        fail(q->loc, "pruning modifiers apply only to single-variable patterns");
      }
    } else if (!is_op(")")) {
      unexpected({"')'", "'*'", "'...'"});
    }
    expect_op(")");

    if (is_keyword("directly")) {
      take();
      if (!is_keyword("in")) unexpected({"in"});
      take();
      q->input = InputSpec{InputSpec::Kind::DirectlyIn, expression()};
    } else if (is_keyword("in")) {
      take();
      q->input = InputSpec{InputSpec::Kind::In, expression()};
    }
    if (is_keyword("where")) {
      take();
      q->where = expression();
    }

    std::vector<std::string> bound{q->pattern.first.name};
    if (q->pattern.second) bound.push_back(q->pattern.second->name);
    for (const auto& name : bound) {
      if (std::find(scope_.begin(), scope_.end(), name) != scope_.end()) {
        fail(q->loc, "pattern variable " + name + " is already bound by an enclosing query");
      }
    }
    scope_.insert(scope_.end(), bound.begin(), bound.end());
    if (!is_op("{")) unexpected({"'{'", "where", "in", "directly"});
    q->body = block();
    scope_.resize(scope_.size() - bound.size());
    return q;
  }

  PatternVar pattern_var() {
    if (peek().kind != TokenKind::NodeType) unexpected({"node type"});
    PatternVar v;
    v.type = take().text;
    v.name = expect_ident();
    return v;
  }

  // Statements -------------------------------------------------------------
  std::vector<Stmt> block() {
    expect_op("{");
    std::vector<Stmt> out;
    while (!is_op("}")) {
      if (peek().kind == TokenKind::End) unexpected({"'}'"});
      out.push_back(statement());
    }
    take();
    return out;
  }

  std::vector<Stmt> branch() {
    if (is_op("{")) return block();
    std::vector<Stmt> out;
    out.push_back(statement());
    return out;
  }

  Stmt statement() {
    Stmt s;
    s.loc = peek().loc;
    if (is_keyword("select")) {
      s.kind = Stmt::Kind::Select;
      s.select = select();
      return s;
    }
    if (is_keyword("if")) {
      take();
      s.kind = Stmt::Kind::If;
      expect_op("(");
      s.expr = expression();
      expect_op(")");
      s.body = branch();
      // `else` binds to the nearest `if`.
      if (is_keyword("else")) {
        take();
        s.else_body = branch();
      }
      return s;
    }
    if (is_keyword("while")) {
      take();
      s.kind = Stmt::Kind::While;
      expect_op("(");
      s.expr = expression();
      expect_op(")");
      s.body = branch();
      return s;
    }
    if (is_keyword("callquery")) {
      take();
      s.kind = Stmt::Kind::CallQuery;
      expect_op("(");
      s.target = expect_ident();
      expect_op(")");
      if (is_keyword("directly")) {
        take();
        if (!is_keyword("in")) unexpected({"in"});
        take();
        s.input = InputSpec{InputSpec::Kind::DirectlyIn, expression()};
      } else if (is_keyword("in")) {
        take();
        s.input = InputSpec{InputSpec::Kind::In, expression()};
      }
      expect_op(";");
      return s;
    }
    if (peek().kind == TokenKind::Identifier) {
      if (is_op(":", 1)) fail(peek().loc, "labels are only allowed on top-level queries");
      if (peek().text == "print" && is_op("(", 1)) {
        take();
        take();
        s.kind = Stmt::Kind::Print;
        s.expr = expression();
        expect_op(")");
        expect_op(";");
        return s;
      }
      if (is_op("=", 1) || is_op("+=", 1) || is_op("-=", 1)) {
        s.kind = Stmt::Kind::Assign;
        s.target = take().text;
        s.op = take().text;
        s.expr = expression();
        expect_op(";");
        return s;
      }
      if (is_op("++", 1) || is_op("--", 1)) {
        s.kind = Stmt::Kind::IncDec;
        s.target = take().text;
        s.op = take().text;
        expect_op(";");
        return s;
      }
    }
    if (peek().kind == TokenKind::Keyword && peek().text != "true" && peek().text != "false") {
      unexpected({"statement"});
    }
    s.kind = Stmt::Kind::ExprStmt;
    s.expr = expression();
    expect_op(";");
    return s;
  }

  void check_labels(const std::vector<Stmt>& body, const std::set<std::string>& labels) const {
    for (const Stmt& s : body) {
      if (s.kind == Stmt::Kind::CallQuery && !labels.contains(s.target)) {
        fail(s.loc, "unresolved query label " + s.target);
      }
      check_labels(s.body, labels);
      if (s.else_body) check_labels(*s.else_body, labels);
      if (s.select) check_labels(s.select->body, labels);
    }
  }

  // Expressions ------------------------------------------------------------
  Expr expression() { return binary(0); }

  static int precedence(const Token& t) {
    if (t.kind != TokenKind::Operator) return 0;
    const std::string& op = t.text;
    if (op == "||") return 1;
    if (op == "&&") return 2;
    if (op == "==" || op == "!=") return 3;
    if (op == "<" || op == "<=" || op == ">" || op == ">=") return 4;
    if (op == "+" || op == "-") return 5;
    if (op == "*") return 6;
    return 0;
  }

  Expr binary(int min_prec) {
    Expr lhs = unary();
    while (true) {
      int prec = precedence(peek());
      if (prec == 0 || prec <= min_prec) return lhs;
      Expr e;
      e.kind = Expr::Kind::Infix;
      e.loc = peek().loc;
      e.text = take().text;
      Expr rhs = binary(prec);
      e.operands.push_back(std::move(lhs));
      e.operands.push_back(std::move(rhs));
      lhs = std::move(e);
    }
  }

  Expr unary() {
    if (is_op("!") || is_op("-")) {
      Expr e;
      e.kind = Expr::Kind::Prefix;
      e.loc = peek().loc;
      e.text = take().text;
      e.operands.push_back(unary());
      return e;
    }
    return postfix();
  }

  void arguments(Expr& call) {
    expect_op("(");
    if (!is_op(")")) {
      call.operands.push_back(expression());
      while (is_op(",")) {
        take();
        call.operands.push_back(expression());
      }
    }
    expect_op(")");
  }

  Expr postfix() {
    Expr e = primary();
    while (is_op(".")) {
      take();
      Expr next;
      next.loc = peek().loc;
      if (peek().kind == TokenKind::NodeType) {
        next.kind = Expr::Kind::Access;
        next.braced = true;
        next.text = take().text;
        next.operands.push_back(std::move(e));
      } else if (peek().kind == TokenKind::Identifier) {
        next.text = take().text;
        if (is_op("(")) {
          next.kind = Expr::Kind::Call;
          next.has_receiver = true;
          next.operands.push_back(std::move(e));
          arguments(next);
        } else {
          next.kind = Expr::Kind::Access;
          next.operands.push_back(std::move(e));
        }
      } else {
        unexpected({"identifier", "node type"});
      }
      e = std::move(next);
    }
    return e;
  }

  Expr primary() {
    Expr e;
    e.loc = peek().loc;
    const Token& t = peek();
    switch (t.kind) {
      case TokenKind::Integer: {
        e.kind = Expr::Kind::Integer;
        auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), e.integer);
        if (ec != std::errc()) fail(t.loc, "integer literal out of range");
        take();
        return e;
      }
      case TokenKind::String:
        e.kind = Expr::Kind::String;
        e.text = take().text;
        return e;
      case TokenKind::NodeType:
        e.kind = Expr::Kind::NodeType;
        e.text = take().text;
        return e;
      case TokenKind::Keyword:
        if (t.text == "true" || t.text == "false") {
          e.kind = Expr::Kind::Boolean;
          e.boolean = take().text == "true";
          return e;
        }
        break;
      case TokenKind::Identifier:
        e.text = take().text;
        if (e.text == "count" && is_op("(") && is_op("*", 1) && is_op(")", 2)) {
          take();
          take();
          take();
          e.kind = Expr::Kind::CountStar;
          e.text.clear();
          return e;
        }
        if (is_op("(")) {
          e.kind = Expr::Kind::Call;
          arguments(e);
          return e;
        }
        e.kind = Expr::Kind::Variable;
        return e;
      case TokenKind::Operator:
        if (t.text == "(") {
          take();
          Expr inner = expression();
          expect_op(")");
          return inner;
        }
        break;
      default:
        break;
    }
    unexpected({"integer", "string", "true", "false", "identifier", "node type", "'('", "'!'", "'-'"});
  }

  const std::vector<Token>& toks_;
  std::string source_;
  std::size_t pos_ = 0;
  std::vector<std::string> scope_;
};

}  // namespace

QueryDocument parse_query_document(const std::vector<Token>& tokens, std::string source) {
  return Parser(tokens, std::move(source)).run();
}

QueryDocument parse_query_text(std::string_view text, std::string source) {
  auto tokens = tokenize(text, source);
  return parse_query_document(tokens, std::move(source));
}

const SelectQuery* QueryDocument::find_label(std::string_view label) const {
  for (const auto& lq : queries) {
    if (lq.label && *lq.label == label) return lq.query.get();
  }
  return nullptr;
}

}  // namespace craql::query
