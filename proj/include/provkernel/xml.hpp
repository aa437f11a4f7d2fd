#pragma once

#include <initializer_list>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace provkernel::xml {

// A parsed or to-be-written element. Attribute order is preserved; callers
// that need canonical output insert attributes in canonical order.
struct Element {
  std::string name;
  std::vector<std::pair<std::string, std::string>> attributes;
  std::vector<Element> children;
  std::string text;
  int line = 0;
  int column = 0;

  Element() = default;
  explicit Element(std::string element_name) : name(std::move(element_name)) {}

  const std::string* attr(std::string_view key) const;
  std::string attr_or(std::string_view key, std::string fallback) const;
  // Throws SchemaViolation naming the element position when absent.
  const std::string& required_attr(std::string_view key) const;

  Element& set(std::string key, std::string value);
  Element& add(Element child);
  Element& add_child(std::string child_name);
  Element& with_text(std::string value);

  std::string position() const;
};

// Serializes with a UTF-8 declaration, two-space indentation and a trailing
// newline. Output is a pure function of the element tree.
std::string write(const Element& root);

// Strict parser: one root element, optional XML declaration, comments allowed
// between markup. Whitespace-only text inside elements that have children is
// dropped. Throws ParseError("line L, column C: ...") on malformed input.
Element parse(std::string_view document);

bool well_formed(std::string_view document);

// SchemaViolation if the element carries any attribute outside `allowed`.
void expect_only_attributes(const Element& element, std::initializer_list<std::string_view> allowed);
// SchemaViolation if the element has children (for text-only elements).
void expect_no_children(const Element& element);
// SchemaViolation if the element has non-whitespace text.
void expect_no_text(const Element& element);

}  // namespace provkernel::xml
