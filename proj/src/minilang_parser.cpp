#include <cctype>
#include <unordered_set>

#include "craql/minilang.hpp"

namespace craql::minilang {

namespace {

enum class Tok { Ident, Keyword, Number, String, Op, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  std::uint32_t start = 0;  // scalar offsets
  std::uint32_t end = 0;
  std::uint32_t line = 1;
  std::uint32_t column = 1;
};

const std::unordered_set<std::string_view> kKeywords = {
    "class", "interface", "extends", "if",  "else", "while", "for",  "return",
    "break", "continue",  "throw",   "try", "catch", "new",  "true", "false",
};

class Lexer {
 public:
  Lexer(std::string_view text, std::string file, std::vector<Diagnostic>& diags)
      : text_(text), file_(std::move(file)), diags_(diags) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_trivia();
      Token t;
      t.start = offset_;
      t.line = line_;
      t.column = column_;
      if (pos_ >= text_.size()) {
        t.end = offset_;
        out.push_back(t);
        return out;
      }
      char c = text_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$') {
        while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
                                       text_[pos_] == '_' || text_[pos_] == '$')) {
          t.text += advance();
        }
        t.kind = kKeywords.contains(t.text) ? Tok::Keyword : Tok::Ident;
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) t.text += advance();
        t.kind = Tok::Number;
      } else if (c == '"') {
        t.kind = Tok::String;
        t.text += advance();
        bool closed = false;
        while (pos_ < text_.size() && text_[pos_] != '\n') {
          char d = advance();
          t.text += d;
          if (d == '\\' && pos_ < text_.size()) {
            t.text += advance();
          } else if (d == '"') {
            closed = true;
            break;
          }
        }
        if (!closed) report(t, "unterminated string literal");
      } else {
        static constexpr std::string_view kOps[] = {"&&", "||", "==", "!=", "<=", ">=", "+=", "-=",
                                                     "{",  "}",  "(",  ")",  ";",  ",",  ".",  "=",
                                                     "<",  ">",  "+",  "-",  "*",  "/",  "%",  "!"};
        bool matched = false;
        for (std::string_view op : kOps) {
          if (text_.substr(pos_, op.size()) == op) {
            for (std::size_t i = 0; i < op.size(); ++i) advance();
            t.text = std::string(op);
            t.kind = Tok::Op;
            matched = true;
            break;
          }
        }
        if (!matched) {
          report(t, std::string("stray character '") + c + "'");
          advance();
          continue;
        }
      }
      t.end = offset_;
      out.push_back(std::move(t));
    }
  }

 private:
  char advance() {
    char c = text_[pos_++];
    if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) {
      ++offset_;
      ++column_;
    }
    if (c == '\n') {
      ++line_;
      column_ = 1;
    }
    return c;
  }

  void skip_trivia() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else if (text_.substr(pos_, 2) == "//") {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (text_.substr(pos_, 2) == "/*") {
        Token at{Tok::End, {}, offset_, offset_, line_, column_};
        advance();
        advance();
        while (pos_ < text_.size() && text_.substr(pos_, 2) != "*/") advance();
        if (pos_ >= text_.size()) {
          report(at, "unterminated block comment");
        } else {
          advance();
          advance();
        }
      } else {
        return;
      }
    }
  }

  void report(const Token& at, std::string message) {
    diags_.push_back({file_, at.line, at.column, std::move(message), Severity::Error});
  }

  std::string_view text_;
  std::string file_;
  std::vector<Diagnostic>& diags_;
  std::size_t pos_ = 0;
  std::uint32_t offset_ = 0;
  std::uint32_t line_ = 1;
  std::uint32_t column_ = 1;
};

struct SyntaxError {
  std::string message;
  std::size_t token;
};

struct Unrecoverable {};

class Parser {
 public:
  Parser(std::vector<Token> tokens, std::string file, std::vector<Diagnostic>& diags)
      : toks_(std::move(tokens)), file_(std::move(file)), diags_(diags), tree_(*schema()) {}

  std::optional<std::pair<std::vector<AstNode>, NodeId>> run(std::uint32_t file_length) {
    NodeId unit = tree_.make("CompilationUnit", Span{0, 0, file_length, 1});
    try {
      while (!at_end()) {
        if (is_keyword("class") || is_keyword("interface")) {
          try {
            tree_.append_child(unit, "types", type_declaration());
          } catch (const SyntaxError& e) {
            report(e);
            sync_to_type();
          }
        } else {
          report({"expected 'class' or 'interface'", pos_});
          sync_to_type();
        }
      }
    } catch (const Unrecoverable&) {
      return std::nullopt;
    }
    return std::make_pair(tree_.take(), unit);
  }

 private:
  // Token access ---------------------------------------------------------
  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  bool at_end() const { return peek().kind == Tok::End; }
  bool is_op(std::string_view op, std::size_t ahead = 0) const {
    return peek(ahead).kind == Tok::Op && peek(ahead).text == op;
  }
  bool is_keyword(std::string_view kw) const { return peek().kind == Tok::Keyword && peek().text == kw; }
  const Token& take() {
    const Token& t = toks_[pos_];
    if (t.kind != Tok::End) ++pos_;
    return t;
  }
  std::uint32_t prev_end() const { return pos_ == 0 ? 0 : toks_[pos_ - 1].end; }

  [[noreturn]] void error(std::string message) const { throw SyntaxError{std::move(message), pos_}; }

  std::string describe(const Token& t) const {
    return t.kind == Tok::End ? "end of file" : "'" + t.text + "'";
  }

  void expect_op(std::string_view op) {
    if (!is_op(op)) error("expected '" + std::string(op) + "', found " + describe(peek()));
    take();
  }
  std::string expect_ident(const char* what) {
    if (peek().kind != Tok::Ident) error(std::string("expected ") + what + ", found " + describe(peek()));
    return take().text;
  }

  void report(const SyntaxError& e) {
    const Token& t = toks_[std::min(e.token, toks_.size() - 1)];
    diags_.push_back({file_, t.line, t.column, e.message, Severity::Error});
    if (++errors_ > 100) fatal(t, "too many errors");
  }

  [[noreturn]] void fatal(const Token& t, std::string message) {
    diags_.push_back({file_, t.line, t.column, std::move(message), Severity::Fatal});
    throw Unrecoverable{};
  }

  Span span_from(std::size_t start_token) const {
    const Token& t = toks_[start_token];
    return Span{0, t.start, std::max(prev_end(), t.start), t.line};
  }

  void close_span(NodeId n) { tree_[n].span.end = std::max(prev_end(), tree_[n].span.start); }

  NodeId make(std::string_view type, std::size_t start_token) { return tree_.make(type, span_from(start_token)); }

  // Recovery ---------------------------------------------------------------
  // Skips to just after ';' or just before '}' at the current nesting level.
  void sync_statement() {
    int depth = 0;
    while (!at_end()) {
      if (is_op("{")) {
        ++depth;
      } else if (is_op("}")) {
        if (depth == 0) return;
        --depth;
        if (depth == 0) {
          take();
          return;
        }
      } else if (is_op(";") && depth == 0) {
        take();
        return;
      }
      take();
    }
  }

  void sync_to_type() {
    while (!at_end() && !is_keyword("class") && !is_keyword("interface")) take();
  }

  void expect_close_brace(const Token& opener) {
    if (at_end()) fatal(opener, "unbalanced '{' reaches end of file");
    expect_op("}");
  }

  // Declarations -----------------------------------------------------------
  NodeId type_declaration() {
    std::size_t start = pos_;
    bool is_interface = take().text == "interface";
    NodeId td = make("TypeDeclaration", start);
    tree_.set_token(td, "name", expect_ident("type name"));
    tree_.set_token(td, "interface", is_interface ? "true" : "false");
    if (is_keyword("extends")) {
      take();
      tree_.set_token(td, "superclass", expect_ident("superclass name"));
    }
    const Token& opener = peek();
    expect_op("{");
    while (!is_op("}") && !at_end()) {
      try {
        member(td);
      } catch (const SyntaxError& e) {
        report(e);
        sync_statement();
      }
    }
    expect_close_brace(opener);
    close_span(td);
    return td;
  }

  void member(NodeId td) {
    std::size_t start = pos_;
    std::string type = expect_ident("member type");
    std::string name = expect_ident("member name");
    if (is_op("(")) {
      NodeId md = make("MethodDeclaration", start);
      tree_.set_token(md, "returnType", type);
      tree_.set_token(md, "name", name);
      take();
      if (!is_op(")")) {
        do {
          std::size_t pstart = pos_;
          std::string ptype = expect_ident("parameter type");
          std::string pname = expect_ident("parameter name");
          NodeId p = make("SingleVariableDeclaration", pstart);
          tree_.set_token(p, "type", ptype);
          tree_.set_token(p, "name", pname);
          tree_.append_child(md, "parameters", p);
        } while (is_op(",") && (take(), true));
      }
      expect_op(")");
      if (is_op(";")) {
        take();
      } else {
        tree_.set_child(md, "body", block());
      }
      close_span(md);
      tree_.append_child(td, "bodyDeclarations", md);
      return;
    }
    NodeId fd = make("FieldDeclaration", start);
    tree_.set_token(fd, "type", type);
    fragments(fd, name, start + 1);
    expect_op(";");
    close_span(fd);
    tree_.append_child(td, "bodyDeclarations", fd);
  }

  // Parses `name [= init] (, name [= init])*` after the first name was consumed.
  void fragments(NodeId owner, std::string first_name, std::size_t first_token) {
    std::string name = std::move(first_name);
    std::size_t start = first_token;
    while (true) {
      NodeId frag = make("VariableDeclaration", start);
      tree_.set_token(frag, "name", name);
      if (is_op("=")) {
        take();
        tree_.set_child(frag, "initializer", expression());
      }
      close_span(frag);
      tree_.append_child(owner, "fragments", frag);
      if (!is_op(",")) break;
      take();
      start = pos_;
      name = expect_ident("variable name");
    }
  }

  // Statements -------------------------------------------------------------
  NodeId block() {
    std::size_t start = pos_;
    const Token& opener = peek();
    expect_op("{");
    NodeId b = make("Block", start);
    while (!is_op("}") && !at_end()) {
      try {
        tree_.append_child(b, "statements", statement());
      } catch (const SyntaxError& e) {
        report(e);
        sync_statement();
      }
    }
    expect_close_brace(opener);
    close_span(b);
    return b;
  }

  bool at_local_declaration() const { return peek().kind == Tok::Ident && peek(1).kind == Tok::Ident; }

  NodeId local_declaration() {
    std::size_t start = pos_;
    NodeId vds = make("VariableDeclarationStatement", start);
    tree_.set_token(vds, "type", take().text);
    std::size_t name_token = pos_;
    std::string name = take().text;
    fragments(vds, name, name_token);
    return vds;
  }

  NodeId statement() {
    std::size_t start = pos_;
    if (is_op("{")) return block();
    if (is_keyword("if")) {
      take();
      NodeId s = make("IfStatement", start);
      expect_op("(");
      tree_.set_child(s, "expression", expression());
      expect_op(")");
      tree_.set_child(s, "thenStatement", statement());
      if (is_keyword("else")) {
        take();
        tree_.set_child(s, "elseStatement", statement());
      }
      close_span(s);
      return s;
    }
    if (is_keyword("while")) {
      take();
      NodeId s = make("WhileStatement", start);
      expect_op("(");
      tree_.set_child(s, "expression", expression());
      expect_op(")");
      tree_.set_child(s, "body", statement());
      close_span(s);
      return s;
    }
    if (is_keyword("for")) {
      take();
      NodeId s = make("ForStatement", start);
      expect_op("(");
      if (!is_op(";")) {
        if (at_local_declaration()) {
          NodeId init = local_declaration();
          close_span(init);
          tree_.append_child(s, "initializers", init);
        } else {
          do tree_.append_child(s, "initializers", expression());
          while (is_op(",") && (take(), true));
        }
      }
      expect_op(";");
      if (!is_op(";")) tree_.set_child(s, "expression", expression());
      expect_op(";");
      if (!is_op(")")) {
        do tree_.append_child(s, "updaters", expression());
        while (is_op(",") && (take(), true));
      }
      expect_op(")");
      tree_.set_child(s, "body", statement());
      close_span(s);
      return s;
    }
    if (is_keyword("return")) {
      take();
      NodeId s = make("ReturnStatement", start);
      if (!is_op(";")) tree_.set_child(s, "expression", expression());
      expect_op(";");
      close_span(s);
      return s;
    }
    if (is_keyword("break") || is_keyword("continue")) {
      bool is_break = take().text == "break";
      NodeId s = make(is_break ? "BreakStatement" : "ContinueStatement", start);
      expect_op(";");
      close_span(s);
      return s;
    }
    if (is_keyword("throw")) {
      take();
      NodeId s = make("ThrowStatement", start);
      tree_.set_child(s, "expression", expression());
      expect_op(";");
      close_span(s);
      return s;
    }
    if (is_keyword("try")) {
      take();
      NodeId s = make("TryStatement", start);
      tree_.set_child(s, "body", block());
      if (!is_keyword("catch")) error("expected 'catch' after try block");
      while (is_keyword("catch")) {
        std::size_t cstart = pos_;
        take();
        NodeId cc = make("CatchClause", cstart);
        expect_op("(");
        std::size_t pstart = pos_;
        std::string ptype = expect_ident("exception type");
        std::string pname = expect_ident("exception name");
        NodeId p = make("SingleVariableDeclaration", pstart);
        tree_.set_token(p, "type", ptype);
        tree_.set_token(p, "name", pname);
        tree_.set_child(cc, "exception", p);
        expect_op(")");
        tree_.set_child(cc, "body", block());
        close_span(cc);
        tree_.append_child(s, "catchClauses", cc);
      }
      close_span(s);
      return s;
    }
    if (at_local_declaration()) {
      NodeId s = local_declaration();
      expect_op(";");
      close_span(s);
      return s;
    }
    if (peek().kind == Tok::Keyword && peek().text != "new" && peek().text != "true" && peek().text != "false") {
      error("unexpected " + describe(peek()) + " at statement start");
    }
    NodeId s = make("ExpressionStatement", start);
    tree_.set_child(s, "expression", expression());
    expect_op(";");
    close_span(s);
    return s;
  }

  // Expressions ------------------------------------------------------------
  NodeId expression() {
    std::size_t start = pos_;
    NodeId lhs = binary(0);
    if (is_op("=") || is_op("+=") || is_op("-=")) {
      std::string op = take().text;
      NodeId a = make("Assignment", start);
      tree_.set_child(a, "leftHandSide", lhs);
      tree_.set_token(a, "operator", op);
      tree_.set_child(a, "rightHandSide", expression());
      close_span(a);
      return a;
    }
    return lhs;
  }

  static int precedence(const std::string& op) {
    if (op == "||") return 1;
    if (op == "&&") return 2;
    if (op == "==" || op == "!=") return 3;
    if (op == "<" || op == ">" || op == "<=" || op == ">=") return 4;
    if (op == "+" || op == "-") return 5;
    if (op == "*" || op == "/" || op == "%") return 6;
    return 0;
  }

  NodeId binary(int min_prec) {
    std::size_t start = pos_;
    NodeId lhs = unary();
    while (peek().kind == Tok::Op) {
      int prec = precedence(peek().text);
      if (prec == 0 || prec <= min_prec) break;
      std::string op = take().text;
      NodeId rhs = binary(prec);
      NodeId e = make("InfixExpression", start);
      tree_.set_child(e, "leftOperand", lhs);
      tree_.set_token(e, "operator", op);
      tree_.set_child(e, "rightOperand", rhs);
      close_span(e);
      lhs = e;
    }
    return lhs;
  }

  NodeId unary() {
    std::size_t start = pos_;
    if (is_op("!") || is_op("-")) {
      std::string op = take().text;
      NodeId operand = unary();
      NodeId e = make("PrefixExpression", start);
      tree_.set_token(e, "operator", op);
      tree_.set_child(e, "operand", operand);
      close_span(e);
      return e;
    }
    return postfix();
  }

  void arguments(NodeId call) {
    expect_op("(");
    if (!is_op(")")) {
      do tree_.append_child(call, "arguments", expression());
      while (is_op(",") && (take(), true));
    }
    expect_op(")");
  }

  NodeId postfix() {
    std::size_t start = pos_;
    NodeId e = primary();
    while (is_op(".")) {
      take();
      std::string name = expect_ident("member name after '.'");
      if (is_op("(")) {
        NodeId call = make("MethodInvocation", start);
        tree_.set_child(call, "expression", e);
        tree_.set_token(call, "name", name);
        arguments(call);
        close_span(call);
        e = call;
      } else {
        NodeId fa = make("FieldAccess", start);
        tree_.set_child(fa, "expression", e);
        tree_.set_token(fa, "name", name);
        close_span(fa);
        e = fa;
      }
    }
    return e;
  }

  NodeId primary() {
    std::size_t start = pos_;
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Number: {
        NodeId e = make("NumberLiteral", start);
        tree_.set_token(e, "token", take().text);
        close_span(e);
        return e;
      }
      case Tok::String: {
        NodeId e = make("StringLiteral", start);
        tree_.set_token(e, "escapedValue", take().text);
        close_span(e);
        return e;
      }
      case Tok::Keyword:
        if (t.text == "true" || t.text == "false") {
          NodeId e = make("BooleanLiteral", start);
          tree_.set_token(e, "booleanValue", take().text);
          close_span(e);
          return e;
        }
        if (t.text == "new") {
          take();
          NodeId e = make("ClassInstanceCreation", start);
          tree_.set_token(e, "type", expect_ident("class name after 'new'"));
          arguments(e);
          close_span(e);
          return e;
        }
        break;
      case Tok::Ident: {
        std::string name = take().text;
        if (is_op("(")) {
          NodeId call = make("MethodInvocation", start);
          tree_.set_token(call, "name", name);
          arguments(call);
          close_span(call);
          return call;
        }
        NodeId e = make("Name", start);
        tree_.set_token(e, "identifier", name);
        close_span(e);
        return e;
      }
      case Tok::Op:
        if (t.text == "(") {
          take();
          NodeId inner = expression();
          expect_op(")");
          return inner;
        }
        break;
      default:
        break;
    }
    error("expected an expression, found " + describe(t));
  }

  std::vector<Token> toks_;
  std::string file_;
  std::vector<Diagnostic>& diags_;
  TreeBuilder tree_;
  std::size_t pos_ = 0;
  int errors_ = 0;
};

}  // namespace

ParseOutput parse_file(std::string file_name, std::string text) {
  ParseOutput out;
  SourceFile source(file_name, text);
  std::vector<Token> tokens = Lexer(text, file_name, out.diagnostics).run();
  Parser parser(std::move(tokens), file_name, out.diagnostics);
  auto result = parser.run(source.length());
  if (result) {
    out.tree = ParsedFile{std::move(source), std::move(result->first), result->second};
  }
  return out;
}

}  // namespace craql::minilang
