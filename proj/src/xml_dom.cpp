#include "xml_dom.hpp"

#include <expat.h>

#include <limits>
#include <memory>

namespace kg::xml {

namespace {

struct ParserState {
  XML_Parser parser = nullptr;
  std::string file;
  std::optional<Element> root;
  std::vector<Element*> stack;

  SourceLocation here() const {
    return {file, static_cast<int>(XML_GetCurrentLineNumber(parser)),
            static_cast<int>(XML_GetCurrentColumnNumber(parser)) + 1};
  }
};

void XMLCALL on_start(void* data, const XML_Char* name, const XML_Char** attrs) {
  auto& st = *static_cast<ParserState*>(data);
  Element e;
  e.name = name;
  e.location = st.here();
  for (std::size_t i = 0; attrs[i] != nullptr; i += 2) {
    e.attributes.emplace_back(attrs[i], attrs[i + 1]);
  }
  if (st.stack.empty()) {
    st.root = std::move(e);
    st.stack.push_back(&*st.root);
  } else {
    auto& children = st.stack.back()->children;
    children.push_back(std::move(e));
    st.stack.push_back(&children.back());
  }
}

void XMLCALL on_end(void* data, const XML_Char*) {
  static_cast<ParserState*>(data)->stack.pop_back();
}

void XMLCALL on_text(void* data, const XML_Char* s, int len) {
  auto& st = *static_cast<ParserState*>(data);
  if (st.stack.empty() || st.stack.back()->stray_text) {
    return;
  }
  for (int i = 0; i < len; ++i) {
    const char c = s[i];
    if (c != ' ' && c != '\t' && c != '\n' && c != '\r') {
      st.stack.back()->stray_text = st.here();
      return;
    }
  }
}

} // namespace

Document parse(std::string_view text, std::string_view file_name) {
  Document doc;
  std::unique_ptr<XML_ParserStruct, decltype(&XML_ParserFree)> parser(XML_ParserCreate("UTF-8"), &XML_ParserFree);
  ParserState st;
  st.parser = parser.get();
  st.file = std::string(file_name);
  XML_SetUserData(parser.get(), &st);
  XML_SetElementHandler(parser.get(), on_start, on_end);
  XML_SetCharacterDataHandler(parser.get(), on_text);

  // Feed in chunks that fit expat's int length parameter.
  constexpr std::size_t kChunk = static_cast<std::size_t>(std::numeric_limits<int>::max() / 2);
  std::size_t offset = 0;
  bool ok = true;
  do {
    const std::size_t n = std::min(kChunk, text.size() - offset);
    const bool last = offset + n == text.size();
    if (XML_Parse(parser.get(), text.data() + offset, static_cast<int>(n), last ? 1 : 0) == XML_STATUS_ERROR) {
      ok = false;
      break;
    }
    offset += n;
  } while (offset < text.size());

  if (!ok) {
    Diagnostic d;
    d.code = "KG001";
    d.message = std::string("malformed XML: ") + XML_ErrorString(XML_GetErrorCode(parser.get()));
    d.location = st.here();
    doc.diagnostics.push_back(std::move(d));
    return doc;
  }
  doc.root = std::move(st.root);
  return doc;
}

std::string escape_attribute(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
    case '&':
      out += "&amp;";
      break;
    case '<':
      out += "&lt;";
      break;
    case '>':
      out += "&gt;";
      break;
    case '"':
      out += "&quot;";
      break;
    case '\n':
      out += "&#10;";
      break;
    case '\t':
      out += "&#9;";
      break;
    case '\r':
      out += "&#13;";
      break;
    default:
      out += c;
    }
  }
  return out;
}

} // namespace kg::xml
