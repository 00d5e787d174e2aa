#include "generators.hpp"

#include <algorithm>
#include <cstdio>

namespace craql::testgen {

std::string nested_blocks_source(int depth) {
  std::string out = "class Nest {\n  void deep() {\n";
  for (int level = 1; level <= depth; ++level) {
    std::string pad(static_cast<std::size_t>(2 + 2 * level), ' ');
    if (level > 1) out += pad.substr(2) + "{\n";
    out += pad + "int d" + std::to_string(level) + " = " + std::to_string(level) + ";\n";
  }
  for (int level = depth; level >= 1; --level) {
    std::string pad(static_cast<std::size_t>(2 * level), ' ');
    out += pad + "}\n";
  }
  return out + "}\n";
}

std::string paired_blocks_source(int methods) {
  std::string out = "class Blocks {\n";
  for (int k = 0; k < methods; ++k) out += "  void m" + std::to_string(k) + "() { { } }\n";
  return out + "}\n";
}

namespace {

class ProgramWriter {
 public:
  explicit ProgramWriter(std::mt19937& rng) : rng_(rng) {}

  std::string program(int classes) {
    for (int c = 0; c < classes; ++c) type_decl(c, classes);
    return std::move(out_);
  }

 private:
  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }
  bool chance(int percent) { return pick(100) < percent; }

  void line(int indent, const std::string& text) {
    out_ += std::string(static_cast<std::size_t>(indent) * 2, ' ') + text + "\n";
  }

  std::string class_name(int c) const { return "C" + std::to_string(c); }

  void type_decl(int c, int classes) {
    std::string header = "class " + class_name(c);
    if (c > 0 && chance(30)) header += " extends " + class_name(pick(c));
    line(0, header + " {");
    int fields = pick(3);
    for (int f = 0; f < fields; ++f) {
      line(1, (chance(50) ? class_name(pick(classes)) : std::string("int")) + " f" + std::to_string(f) + ";");
    }
    int methods = 1 + pick(4);
    for (int m = 0; m < methods; ++m) method(m);
    line(0, "}");
  }

  void method(int m) {
    int params = pick(3);
    std::string sig = (chance(50) ? "int" : "void") + std::string(" m") + std::to_string(m) + "(";
    for (int p = 0; p < params; ++p) sig += (p ? ", int p" : "int p") + std::to_string(p);
    line(1, sig + ") {");
    locals_ = 0;
    int stmts = pick(5);
    for (int s = 0; s < stmts; ++s) statement(2, 0);
    line(1, "}");
  }

  std::string expr(int depth) {
    int k = depth > 2 ? pick(3) : pick(8);
    switch (k) {
      case 0: return std::to_string(pick(10));
      case 1: return locals_ ? "v" + std::to_string(pick(locals_)) : "p0";
      case 2: return chance(50) ? "true" : "\"s\"";
      case 3: return expr(depth + 1) + (chance(50) ? " + " : " < ") + expr(depth + 1);
      case 4: return "m" + std::to_string(pick(4)) + "(" + (chance(50) ? expr(depth + 1) : "") + ")";
      case 5: return "f0.m" + std::to_string(pick(4)) + "().m" + std::to_string(pick(4)) + "()";
      case 6: return "new C0()";
      default: return "!" + expr(depth + 1);
    }
  }

  void block(int indent, int depth) {
    int stmts = pick(4);
    for (int s = 0; s < stmts; ++s) statement(indent, depth + 1);
  }

  void statement(int indent, int depth) {
    int k = depth > 3 ? 8 + pick(5) : pick(13);
    switch (k) {
      case 0:
        line(indent, "{");
        block(indent + 1, depth);
        line(indent, "}");
        break;
      case 1:
        line(indent, "if (" + expr(0) + ") {");
        block(indent + 1, depth);
        if (chance(50)) {
          line(indent, "} else {");
          block(indent + 1, depth);
        }
        line(indent, "}");
        break;
      case 2:
        line(indent, "while (" + expr(0) + ") {");
        block(indent + 1, depth);
        line(indent, "}");
        break;
      case 3:
        line(indent, "for (int k" + std::to_string(depth) + " = 0; k" + std::to_string(depth) + " < 3; k" +
                         std::to_string(depth) + " = k" + std::to_string(depth) + " + 1) {");
        block(indent + 1, depth);
        line(indent, "}");
        break;
      case 4:
        line(indent, "try {");
        block(indent + 1, depth);
        line(indent, "} catch (Error e" + std::to_string(depth) + ") {");
        if (chance(50)) line(indent + 1, "throw new Error(\"again\");");
        block(indent + 1, depth);
        line(indent, "}");
        break;
      case 5:
        line(indent, "break;");
        break;
      case 6:
        line(indent, "continue;");
        break;
      case 7:
        line(indent, "throw new Error(" + expr(1) + ");");
        break;
      case 8:
        line(indent, "return " + expr(0) + ";");
        break;
      case 9:
      case 10:
        line(indent, "int v" + std::to_string(locals_++) + " = " + expr(0) + ";");
        break;
      default:
        line(indent, expr(0) + ";");
        break;
    }
  }

  std::mt19937& rng_;
  std::string out_;
  int locals_ = 0;
};

}  // namespace

std::string random_program(std::mt19937& rng, int classes) { return ProgramWriter(rng).program(classes); }

std::vector<minilang::SourceInput> random_corpus(std::uint32_t seed, int files) {
  std::mt19937 rng(seed);
  std::vector<minilang::SourceInput> out;
  for (int i = 0; i < files; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "Gen%03d.mj", i);
    out.push_back({name, random_program(rng, 1 + static_cast<int>(rng() % 3))});
  }
  return out;
}

std::size_t count_lines(const std::vector<minilang::SourceInput>& files) {
  std::size_t n = 0;
  for (const auto& f : files) n += static_cast<std::size_t>(std::count(f.text.begin(), f.text.end(), '\n'));
  return n;
}

std::vector<minilang::SourceInput> sized_corpus(std::uint32_t seed, std::size_t min_lines) {
  std::mt19937 rng(seed);
  std::vector<minilang::SourceInput> out;
  std::size_t lines = 0;
  while (lines < min_lines) {
    char name[32];
    std::snprintf(name, sizeof name, "Bulk%04zu.mj", out.size());
    out.push_back({name, random_program(rng, 3)});
    lines += static_cast<std::size_t>(std::count(out.back().text.begin(), out.back().text.end(), '\n'));
  }
  return out;
}

}  // namespace craql::testgen
