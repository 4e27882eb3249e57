#include "doctest.h"
#include "jtw/errors.hpp"
#include "jtw/synthetic.hpp"

using namespace jtw;

TEST_CASE("synthetic corpus structure") {
    SyntheticConfig c;
    c.documents = 200;
    c.shared_word = "patient";
    c.shared_topics = {0, 1};
    c.shared_rate = 0.1;
    const auto s = generate_synthetic(c);
    REQUIRE(s.documents.size() == 200);
    CHECK(s.topic_words.size() == 3);
    CHECK(s.word_topic.size() == 90);
    CHECK_FALSE(s.word_topic.contains("patient"));
    std::size_t shared_in_2 = 0, shared_total = 0;
    for (std::size_t d = 0; d < s.documents.size(); ++d) {
        CHECK(s.documents[d].size() == 40);
        for (const auto& w : s.documents[d]) {
            if (w == "patient") {
                ++shared_total;
                shared_in_2 += s.doc_topic[d] == 2;
            } else {
                CHECK(s.word_topic.at(w) == s.doc_topic[d]);
            }
        }
    }
    CHECK(shared_total > 0);
    CHECK(shared_in_2 == 0);

    CHECK(synthetic_text(s) == synthetic_text(generate_synthetic(c)));
    c.shared_topics = {3};
    CHECK_THROWS_AS(generate_synthetic(c), ConfigError);
}
