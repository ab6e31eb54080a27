#pragma once

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace mindtrail::xml {

/// Escapes the five predefined entities; C0 controls other than tab/LF/CR
/// become spaces because XML 1.0 cannot carry them.
std::string escape(std::string_view text);

/// Minimal DOM for the state documents the pipelines exchange. Supports
/// elements, attributes, character data, the predefined entities and
/// numeric character references. No DTDs, namespaces, CDATA or comments.
struct Node {
    std::string name;
    std::map<std::string, std::string> attributes;
    std::vector<Node> children;
    std::string text;  // concatenated character data directly under this node

    const Node* child(std::string_view child_name) const;
    std::vector<const Node*> children_named(std::string_view child_name) const;
    std::string attribute(std::string_view key, std::string_view fallback = {}) const;
};

/// Parses a complete document; throws Error(MalformedStateXml).
Node parse(std::string_view document);

}  // namespace mindtrail::xml
