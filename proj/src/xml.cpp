#include "provkernel/xml.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>

#include "provkernel/error.hpp"

namespace provkernel::xml {

const std::string* Element::attr(std::string_view key) const {
  for (const auto& [k, v] : attributes) {
    if (k == key) return &v;
  }
  return nullptr;
}

std::string Element::attr_or(std::string_view key, std::string fallback) const {
  const std::string* value = attr(key);
  return value ? *value : fallback;
}

const std::string& Element::required_attr(std::string_view key) const {
  const std::string* value = attr(key);
  if (!value) {
    fail(ErrorCode::SchemaViolation,
         position() + ": <" + name + "> missing attribute '" + std::string(key) + "'");
  }
  return *value;
}

Element& Element::set(std::string key, std::string value) {
  for (auto& [k, v] : attributes) {
    if (k == key) {
      v = std::move(value);
      return *this;
    }
  }
  attributes.emplace_back(std::move(key), std::move(value));
  return *this;
}

Element& Element::add(Element child) {
  children.push_back(std::move(child));
  return children.back();
}

Element& Element::add_child(std::string child_name) { return add(Element(std::move(child_name))); }

Element& Element::with_text(std::string value) {
  text = std::move(value);
  return *this;
}

std::string Element::position() const {
  return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

namespace {

void escape_into(std::string& out, std::string_view text, bool attribute) {
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"':
        if (attribute) out += "&quot;";
        else out.push_back(ch);
        break;
      default:
        if (c < 0x20 && (attribute || (ch != '\n' && ch != '\t'))) {
          char buffer[8];
          std::snprintf(buffer, sizeof buffer, "&#x%X;", c);
          out += buffer;
        } else {
          out.push_back(ch);
        }
    }
  }
}

void write_element(std::string& out, const Element& e, int depth) {
  out.append(static_cast<std::size_t>(depth) * 2, ' ');
  out.push_back('<');
  out += e.name;
  for (const auto& [k, v] : e.attributes) {
    out.push_back(' ');
    out += k;
    out += "=\"";
    escape_into(out, v, true);
    out.push_back('"');
  }
  if (e.children.empty()) {
    if (e.text.empty()) {
      out += "/>\n";
    } else {
      out.push_back('>');
      escape_into(out, e.text, false);
      out += "</";
      out += e.name;
      out += ">\n";
    }
    return;
  }
  out += ">\n";
  for (const auto& child : e.children) write_element(out, child, depth + 1);
  out.append(static_cast<std::size_t>(depth) * 2, ' ');
  out += "</";
  out += e.name;
  out += ">\n";
}

bool is_name_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == ':' ||
         static_cast<unsigned char>(c) >= 0x80;
}

bool is_name_char(char c) {
  return is_name_start(c) || std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '.';
}

class Parser {
 public:
  explicit Parser(std::string_view input) : in_(input) {}

  Element parse_document() {
    skip_bom();
    skip_misc(true);
    if (at_end()) error("document has no root element");
    Element root = parse_element();
    skip_misc(false);
    if (!at_end()) error("content after root element");
    return root;
  }

 private:
  std::string_view in_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;

  [[noreturn]] void error(const std::string& message) const {
    fail(ErrorCode::ParseError,
         "line " + std::to_string(line_) + ", column " + std::to_string(column_) + ": " + message);
  }

  bool at_end() const { return pos_ >= in_.size(); }
  char peek() const { return at_end() ? '\0' : in_[pos_]; }
  bool starts_with(std::string_view s) const { return in_.substr(pos_).starts_with(s); }

  char next() {
    if (at_end()) error("unexpected end of document");
    char c = in_[pos_++];
    if (c == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    return c;
  }

  void expect(std::string_view s) {
    if (!starts_with(s)) error("expected '" + std::string(s) + "'");
    for (std::size_t i = 0; i < s.size(); ++i) next();
  }

  void skip_whitespace() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(peek()))) next();
  }

  void skip_bom() {
    if (starts_with("\xEF\xBB\xBF")) pos_ += 3;
  }

  void skip_comment() {
    expect("<!--");
    while (!starts_with("-->")) {
      if (at_end()) error("unterminated comment");
      next();
    }
    expect("-->");
  }

  void skip_misc(bool allow_declaration) {
    while (true) {
      skip_whitespace();
      if (allow_declaration && starts_with("<?xml")) {
        if (pos_ != 0 && in_.substr(0, pos_).find_first_not_of(" \t\r\n\xEF\xBB\xBF") != std::string_view::npos) {
          error("XML declaration not at start");
        }
        while (!starts_with("?>")) {
          if (at_end()) error("unterminated XML declaration");
          next();
        }
        expect("?>");
        allow_declaration = false;
        continue;
      }
      if (starts_with("<!--")) {
        skip_comment();
        continue;
      }
      if (starts_with("<?") || starts_with("<!")) error("unsupported markup declaration");
      return;
    }
  }

  std::string parse_name() {
    if (!is_name_start(peek())) error("expected a name");
    std::string name;
    while (!at_end() && is_name_char(peek())) name.push_back(next());
    return name;
  }

  void parse_reference(std::string& out) {
    expect("&");
    std::string ref;
    while (peek() != ';') {
      if (at_end() || ref.size() > 10) error("unterminated entity reference");
      ref.push_back(next());
    }
    next();
    if (ref == "amp") out.push_back('&');
    else if (ref == "lt") out.push_back('<');
    else if (ref == "gt") out.push_back('>');
    else if (ref == "quot") out.push_back('"');
    else if (ref == "apos") out.push_back('\'');
    else if (ref.size() > 1 && ref[0] == '#') {
      unsigned long code = 0;
      bool hex = ref[1] == 'x';
      std::string digits = ref.substr(hex ? 2 : 1);
      if (digits.empty()) error("empty character reference");
      for (char c : digits) {
        int v;
        if (std::isdigit(static_cast<unsigned char>(c))) v = c - '0';
        else if (hex && std::isxdigit(static_cast<unsigned char>(c))) v = std::tolower(c) - 'a' + 10;
        else error("invalid character reference");
        code = code * (hex ? 16 : 10) + static_cast<unsigned long>(v);
        if (code > 0x10FFFF) error("character reference out of range");
      }
      append_utf8(out, code);
    } else {
      error("unknown entity '&" + ref + ";'");
    }
  }

  static void append_utf8(std::string& out, unsigned long cp) {
    if (cp < 0x80) {
      out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
  }

  Element parse_element() {
    Element e;
    e.line = line_;
    e.column = column_;
    expect("<");
    e.name = parse_name();
    while (true) {
      bool had_space = !at_end() && std::isspace(static_cast<unsigned char>(peek()));
      skip_whitespace();
      if (starts_with("/>")) {
        expect("/>");
        return e;
      }
      if (peek() == '>') {
        next();
        break;
      }
      if (!had_space) error("expected whitespace before attribute");
      std::string key = parse_name();
      skip_whitespace();
      expect("=");
      skip_whitespace();
      char quote = peek();
      if (quote != '"' && quote != '\'') error("attribute value must be quoted");
      next();
      std::string value;
      while (peek() != quote) {
        if (at_end()) error("unterminated attribute value");
        if (peek() == '<') error("'<' in attribute value");
        if (peek() == '&') parse_reference(value);
        else value.push_back(next());
      }
      next();
      if (e.attr(key)) error("duplicate attribute '" + key + "'");
      e.attributes.emplace_back(std::move(key), std::move(value));
    }
    // Content.
    while (true) {
      if (at_end()) error("unterminated element <" + e.name + ">");
      if (starts_with("</")) {
        expect("</");
        std::string closing = parse_name();
        if (closing != e.name) error("mismatched closing tag </" + closing + "> for <" + e.name + ">");
        skip_whitespace();
        expect(">");
        break;
      }
      if (starts_with("<!--")) {
        skip_comment();
        continue;
      }
      if (starts_with("<![CDATA[")) {
        expect("<![CDATA[");
        while (!starts_with("]]>")) {
          if (at_end()) error("unterminated CDATA section");
          e.text.push_back(next());
        }
        expect("]]>");
        continue;
      }
      if (starts_with("<?") || starts_with("<!")) error("unsupported markup in content");
      if (peek() == '<') {
        e.children.push_back(parse_element());
        continue;
      }
      if (peek() == '&') {
        parse_reference(e.text);
        continue;
      }
      e.text.push_back(next());
    }
    if (!e.children.empty() &&
        std::all_of(e.text.begin(), e.text.end(),
                    [](unsigned char c) { return std::isspace(c); })) {
      e.text.clear();
    }
    return e;
  }
};

}  // namespace

std::string write(const Element& root) {
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  write_element(out, root, 0);
  return out;
}

Element parse(std::string_view document) { return Parser(document).parse_document(); }

bool well_formed(std::string_view document) {
  try {
    parse(document);
    return true;
  } catch (const Error&) {
    return false;
  }
}

void expect_only_attributes(const Element& element, std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, value] : element.attributes) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      fail(ErrorCode::SchemaViolation, element.position() + ": unknown attribute '" + key +
                                           "' on <" + element.name + ">");
    }
  }
}

void expect_no_children(const Element& element) {
  if (!element.children.empty()) {
    const Element& child = element.children.front();
    fail(ErrorCode::SchemaViolation, child.position() + ": unexpected element <" + child.name +
                                         "> inside <" + element.name + ">");
  }
}

void expect_no_text(const Element& element) {
  if (std::any_of(element.text.begin(), element.text.end(),
                  [](unsigned char c) { return !std::isspace(c); })) {
    fail(ErrorCode::SchemaViolation,
         element.position() + ": unexpected text inside <" + element.name + ">");
  }
}

}  // namespace provkernel::xml
