#include "mindtrail/xml.hpp"

#include <cctype>

#include "mindtrail/error.hpp"
#include "mindtrail/text.hpp"

namespace mindtrail::xml {

std::string escape(std::string_view text) {
    std::string out;
    out.reserve(text.size() + 16);
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20 && c != '\t' && c != '\n' && c != '\r') {
                    out += ' ';
                } else {
                    out += c;
                }
        }
    }
    return out;
}

const Node* Node::child(std::string_view child_name) const {
    for (const auto& c : children) {
        if (c.name == child_name) return &c;
    }
    return nullptr;
}

std::vector<const Node*> Node::children_named(std::string_view child_name) const {
    std::vector<const Node*> out;
    for (const auto& c : children) {
        if (c.name == child_name) out.push_back(&c);
    }
    return out;
}

std::string Node::attribute(std::string_view key, std::string_view fallback) const {
    auto it = attributes.find(std::string(key));
    return it == attributes.end() ? std::string(fallback) : it->second;
}

namespace {

class Parser {
public:
    explicit Parser(std::string_view src) : src_(src) {}

    Node document() {
        skip_ws();
        if (starts_with("<?xml")) {
            const auto end = src_.find("?>", pos_);
            if (end == std::string_view::npos) fail("unterminated XML declaration");
            pos_ = end + 2;
        }
        skip_ws();
        Node root = element();
        skip_ws();
        if (pos_ != src_.size()) fail("content after root element");
        return root;
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw Error(ErrorCode::MalformedStateXml, what + " at offset " + std::to_string(pos_));
    }

    bool starts_with(std::string_view s) const { return src_.substr(pos_, s.size()) == s; }

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    static bool name_char(char c, bool first) {
        const auto u = static_cast<unsigned char>(c);
        if (std::isalpha(u) || c == '_' || c == ':' || u >= 0x80) return true;
        return !first && (std::isdigit(u) || c == '-' || c == '.');
    }

    std::string name() {
        const auto start = pos_;
        if (pos_ >= src_.size() || !name_char(src_[pos_], true)) fail("expected a name");
        while (pos_ < src_.size() && name_char(src_[pos_], false)) ++pos_;
        return std::string(src_.substr(start, pos_ - start));
    }

    void append_entity(std::string& out) {
        const auto end = src_.find(';', pos_);
        if (end == std::string_view::npos || end - pos_ > 12) fail("unterminated entity");
        const auto ent = src_.substr(pos_ + 1, end - pos_ - 1);
        pos_ = end + 1;
        if (ent == "amp") out += '&';
        else if (ent == "lt") out += '<';
        else if (ent == "gt") out += '>';
        else if (ent == "quot") out += '"';
        else if (ent == "apos") out += '\'';
        else if (!ent.empty() && ent[0] == '#') {
            char32_t cp = 0;
            const bool hex = ent.size() > 1 && (ent[1] == 'x' || ent[1] == 'X');
            const auto digits = ent.substr(hex ? 2 : 1);
            if (digits.empty()) fail("empty character reference");
            for (char d : digits) {
                const auto u = static_cast<unsigned char>(d);
                int v = 0;
                if (std::isdigit(u)) v = d - '0';
                else if (hex && std::isxdigit(u)) v = std::tolower(u) - 'a' + 10;
                else fail("bad character reference");
                cp = cp * (hex ? 16 : 10) + static_cast<char32_t>(v);
                if (cp > 0x10FFFF) fail("character reference out of range");
            }
            out += text::encode_utf8(std::u32string(1, cp));
        } else {
            fail("unknown entity '" + std::string(ent) + "'");
        }
    }

    std::string attribute_value() {
        if (pos_ >= src_.size() || (src_[pos_] != '"' && src_[pos_] != '\'')) fail("expected quoted value");
        const char quote = src_[pos_++];
        std::string out;
        while (pos_ < src_.size() && src_[pos_] != quote) {
            if (src_[pos_] == '<') fail("'<' in attribute value");
            if (src_[pos_] == '&') {
                append_entity(out);
            } else {
                out += src_[pos_++];
            }
        }
        if (pos_ >= src_.size()) fail("unterminated attribute value");
        ++pos_;
        return out;
    }

    Node element() {
        if (!starts_with("<")) fail("expected '<'");
        if (++depth_ > kMaxDepth) fail("nesting too deep");
        ++pos_;
        Node node;
        node.name = name();
        for (;;) {
            const auto before = pos_;
            skip_ws();
            if (starts_with("/>")) {
                pos_ += 2;
                --depth_;
                return node;
            }
            if (starts_with(">")) {
                ++pos_;
                break;
            }
            if (pos_ == before) fail("expected whitespace before attribute");
            auto key = name();
            skip_ws();
            if (!starts_with("=")) fail("expected '='");
            ++pos_;
            skip_ws();
            if (!node.attributes.emplace(key, attribute_value()).second) fail("duplicate attribute " + key);
        }
        for (;;) {
            if (pos_ >= src_.size()) fail("unterminated element <" + node.name + ">");
            if (starts_with("</")) {
                pos_ += 2;
                const auto closing = name();
                if (closing != node.name) fail("mismatched </" + closing + "> for <" + node.name + ">");
                skip_ws();
                if (!starts_with(">")) fail("expected '>'");
                ++pos_;
                --depth_;
                return node;
            }
            if (starts_with("<")) {
                node.children.push_back(element());
            } else if (src_[pos_] == '&') {
                append_entity(node.text);
            } else {
                node.text += src_[pos_++];
            }
        }
    }

    static constexpr int kMaxDepth = 64;

    std::string_view src_;
    std::size_t pos_{0};
    int depth_{0};
};

}  // namespace

Node parse(std::string_view document) { return Parser(document).document(); }

}  // namespace mindtrail::xml
