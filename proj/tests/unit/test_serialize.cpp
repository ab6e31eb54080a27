#include <gtest/gtest.h>

#include "mindtrail/error.hpp"
#include "mindtrail/serialize.hpp"
#include "mindtrail/xml.hpp"
#include "support.hpp"

using namespace mindtrail;

namespace {

Session sample() {
    auto s = create_session("s-1", testkit::kJaneNarrative, "en", 100);
    const auto tid = activate_theme(s, {"Retirement", {"leaving work"}, "I retired last year", Origin::ai}, 110).id;
    const auto qid = select_question(s, tid, {"What changed?", "open up"}, 120).id;
    update_answer(s, qid, "Everything <changed> & \"more\"", 130);
    append_keyword_batch(s, qid, {"routine", "purpose"});
    append_comment(s, qid, {"Keep going", CommentCategory::encouragement, "why", Trigger::automatic, 140});
    append_summary(s, "summary text", 150);
    submit_survey(s, false, {3, 2, 3, 2});
    return s;
}

}  // namespace

TEST(Sha256, KnownVector) {
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(Canonical, SessionRoundTripsByteForByte) {
    const auto s = sample();
    const auto doc = canonical_session(s);
    const auto back = parse_session(doc);
    EXPECT_EQ(back, s);
    EXPECT_EQ(canonical_session(back), doc);
}

TEST(Canonical, KeysAreSortedAndCompact) {
    EXPECT_EQ(canonical_dump(json{{"b", 1}, {"a", {{"d", 2}, {"c", 3}}}}), R"({"a":{"c":3,"d":2},"b":1})");
}

TEST(Canonical, BadDocumentIsAParseError) {
    try {
        parse_session("{not json");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ParseError);
    }
}

TEST(Export, RoundTrip) {
    const auto s = sample();
    StoreRecord r{canonical_session(s), {{100, EventKind::page_enter, {{"page", "narrative"}}}}, ""};
    r.checksum = sha256_hex(r.document);
    const auto back = parse_export(canonical_dump(export_json(r)));
    EXPECT_EQ(back.document, r.document);
    EXPECT_EQ(back.events, r.events);
    EXPECT_EQ(back.checksum, r.checksum);
}

TEST(Events, UnknownKindIsRejected) {
    try {
        json{{"timestamp", 1}, {"kind", "page_teleport"}, {"payload", json::object()}}.get<EventRecord>();
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::UnknownEventKind);
    }
}

TEST(Xml, EscapeRoundTrip) {
    const std::string nasty = "a < b && c > \"d\" 'e' \x01 done";
    const auto doc = xml::parse("<r x=\"" + xml::escape(nasty) + "\">" + xml::escape(nasty) + "</r>");
    EXPECT_EQ(doc.name, "r");
    EXPECT_EQ(doc.text, "a < b && c > \"d\" 'e'   done");
    EXPECT_EQ(doc.attribute("x"), doc.text);
}

TEST(Xml, ParsesNestedElementsAndCharacterReferences) {
    const auto doc = xml::parse("<a><b k=\"1\">x&#44;y&#x21;</b><b/><c>&lt;</c></a>");
    EXPECT_EQ(doc.children_named("b").size(), 2u);
    EXPECT_EQ(doc.child("b")->text, "x,y!");
    EXPECT_EQ(doc.child("b")->attribute("k"), "1");
    EXPECT_EQ(doc.child("c")->text, "<");
}

TEST(Xml, MalformedInputIsReported) {
    for (const char* bad : {"<a>", "<a></b>", "<a x=1></a>", "text", "<a>&bogus;</a>"}) {
        try {
            xml::parse(bad);
            ADD_FAILURE() << bad;
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::MalformedStateXml) << bad;
        }
    }
}
