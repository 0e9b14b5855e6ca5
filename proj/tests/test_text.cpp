#include <catch2/catch_amalgamated.hpp>

#include "sln/common.hpp"
#include "sln/text.hpp"

using namespace sln;

TEST_CASE("preprocess: URL and stopword removal, frozen golden outputs") {
    CHECK(preprocess("Check https://x.y please!!") == std::vector<std::string>{"check"});
    CHECK(preprocess("") == std::vector<std::string>{});
    CHECK(preprocess("   \t\n ") == std::vector<std::string>{});
    CHECK(preprocess("visit www.example.com NOW") ==
          std::vector<std::string>{"visit", "now"});
    CHECK(preprocess("ftp://files.server.org has data") ==
          std::vector<std::string>{"data"});

    // frozen golden fixtures for the shipped stopword list + stemmer
    CHECK(preprocess("The gradient descent converges quickly, doesn't it?") ==
          std::vector<std::string>{"gradient", "descent", "converg", "quickli"});
    CHECK(preprocess("I was running 42 experiments; results were surprising!") ==
          std::vector<std::string>{"run", "experi", "result", "surpris"});
    CHECK(preprocess("lambda=0.5 regularization helps") ==
          std::vector<std::string>{"lambda", "regular", "help"});
}

TEST_CASE("preprocess: shared stems") {
    auto toks = preprocess("running runs ran");
    REQUIRE(toks.size() == 3);
    CHECK(toks[0] == toks[1]);  // running / runs collapse
    CHECK(toks[0] == "run");
    CHECK(toks[2] == "ran");
}

TEST_CASE("porter stemmer: canonical examples") {
    using porter::stem;
    // step 1
    CHECK(stem("caresses") == "caress");
    CHECK(stem("ponies") == "poni");
    CHECK(stem("cats") == "cat");
    CHECK(stem("feed") == "feed");
    CHECK(stem("agreed") == "agre");  // step 5a trims the final e
    CHECK(stem("plastered") == "plaster");
    CHECK(stem("motoring") == "motor");
    CHECK(stem("sing") == "sing");
    CHECK(stem("hopping") == "hop");
    CHECK(stem("falling") == "fall");
    CHECK(stem("filing") == "file");
    CHECK(stem("sized") == "size");
    CHECK(stem("happy") == "happi");
    CHECK(stem("sky") == "sky");
    // steps 2-4
    CHECK(stem("relational") == "relat");
    CHECK(stem("conditional") == "condit");
    CHECK(stem("digitizer") == "digit");
    CHECK(stem("operator") == "oper");
    CHECK(stem("feudalism") == "feudal");
    CHECK(stem("decisiveness") == "decis");
    CHECK(stem("hopefulness") == "hope");
    CHECK(stem("formaliti") == "formal");
    CHECK(stem("formative") == "form");
    CHECK(stem("formalize") == "formal");
    CHECK(stem("electriciti") == "electr");
    CHECK(stem("electrical") == "electr");
    CHECK(stem("adjustable") == "adjust");
    CHECK(stem("replacement") == "replac");
    CHECK(stem("adoption") == "adopt");
    CHECK(stem("adjustment") == "adjust");
    // step 5
    CHECK(stem("probate") == "probat");
    CHECK(stem("rate") == "rate");
    CHECK(stem("controll") == "control");
    CHECK(stem("roll") == "roll");
    // non-ASCII or short tokens pass through
    CHECK(stem("ab") == "ab");
    CHECK(stem("caf\xc3\xa9") == "caf\xc3\xa9");
}

TEST_CASE("embedded stopword list matches shipped data file") {
    std::string file = read_file(std::string(SLN_SOURCE_DIR) + "/data/stopwords_en.txt");
    std::set<std::string> from_file;
    for (const auto& line : split(file, '\n')) {
        auto w = trim(line);
        if (!w.empty()) from_file.insert(w);
    }
    CHECK(from_file == stopwords_en());
}
