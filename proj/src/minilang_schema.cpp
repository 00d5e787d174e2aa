#include "craql/minilang.hpp"

namespace craql::minilang {

namespace {

PropertyDecl child(std::string name) { return {std::move(name), PropertyKind::SingleChild}; }
PropertyDecl list(std::string name) { return {std::move(name), PropertyKind::ChildList}; }
PropertyDecl token(std::string name) { return {std::move(name), PropertyKind::Token}; }

std::shared_ptr<const NodeTypeSchema> make_schema() {
  auto s = std::make_shared<NodeTypeSchema>(std::string(kSchemaName));

  s->add_type("CompilationUnit", std::nullopt, false, {list("types")});
  s->add_type("TypeDeclaration", std::nullopt, false,
              {token("name"), token("interface"), token("superclass"), list("bodyDeclarations")});
  s->add_virtual_type("ClassDeclaration", "TypeDeclaration", "interface", "false");
  s->add_virtual_type("InterfaceDeclaration", "TypeDeclaration", "interface", "true");
  s->add_type("FieldDeclaration", std::nullopt, false, {token("type"), list("fragments")});
  s->add_type("MethodDeclaration", std::nullopt, false,
              {token("returnType"), token("name"), list("parameters"), child("body")});
  s->add_type("SingleVariableDeclaration", std::nullopt, false, {token("type"), token("name")});
  s->add_type("VariableDeclaration", std::nullopt, false, {token("name"), child("initializer")});
  s->add_type("CatchClause", std::nullopt, false, {child("exception"), child("body")});

  s->add_type("Statement", std::nullopt, true);
  s->add_type("Block", "Statement", false, {list("statements")});
  s->add_type("IfStatement", "Statement", false,
              {child("expression"), child("thenStatement"), child("elseStatement")});
  s->add_type("WhileStatement", "Statement", false, {child("expression"), child("body")});
  s->add_type("ForStatement", "Statement", false,
              {list("initializers"), child("expression"), list("updaters"), child("body")});
  s->add_type("ReturnStatement", "Statement", false, {child("expression")});
  s->add_type("BreakStatement", "Statement", false);
  s->add_type("ContinueStatement", "Statement", false);
  s->add_type("ThrowStatement", "Statement", false, {child("expression")});
  s->add_type("TryStatement", "Statement", false, {child("body"), list("catchClauses")});
  s->add_type("ExpressionStatement", "Statement", false, {child("expression")});
  s->add_type("VariableDeclarationStatement", "Statement", false, {token("type"), list("fragments")});

  s->add_type("Expression", std::nullopt, true);
  s->add_type("MethodInvocation", "Expression", false,
              {child("expression"), token("name"), list("arguments")});
  s->add_type("Name", "Expression", false, {token("identifier")});
  s->add_type("FieldAccess", "Expression", false, {child("expression"), token("name")});
  s->add_type("Assignment", "Expression", false,
              {child("leftHandSide"), token("operator"), child("rightHandSide")});
  s->add_type("InfixExpression", "Expression", false,
              {child("leftOperand"), token("operator"), child("rightOperand")});
  s->add_type("PrefixExpression", "Expression", false, {token("operator"), child("operand")});
  s->add_type("ClassInstanceCreation", "Expression", false, {token("type"), list("arguments")});
  s->add_type("NumberLiteral", "Expression", false, {token("token")});
  s->add_type("StringLiteral", "Expression", false, {token("escapedValue")});
  s->add_type("BooleanLiteral", "Expression", false, {token("booleanValue")});
  return s;
}

}  // namespace

std::shared_ptr<const NodeTypeSchema> schema() {
  static const std::shared_ptr<const NodeTypeSchema> instance = make_schema();
  return instance;
}

SchemaRegistry default_registry() {
  SchemaRegistry registry;
  registry.add(schema());
  return registry;
}

std::string Diagnostic::to_string() const {
  const char* level = severity == Severity::Warning ? "warning" : severity == Severity::Error ? "error" : "fatal";
  return file + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + level + ": " + message;
}

}  // namespace craql::minilang
