#ifndef SLN_CORPUS_HPP_
#define SLN_CORPUS_HPP_

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "sln/common.hpp"

namespace sln {

enum class Role { learner, instructor };

inline Role role_from_string(const std::string& s) {
    if (s == "learner") return Role::learner;
    if (s == "instructor") return Role::instructor;
    fail("unknown role '", s, "' (expected learner|instructor)");
}

inline const char* role_to_string(Role r) {
    return r == Role::instructor ? "instructor" : "learner";
}

enum class ThreadStructure { mooc, qa };

/// One forum contribution. Top-level posts, comments, answer contributions
/// and follow-ups are all flattened to this record.
struct Post {
    std::string post_id;
    std::string thread_id;
    std::string author_id;
    int64_t timestamp = 0;  // seconds since epoch, UTC
    std::string body;
    bool anonymous = false;
    Role author_role = Role::learner;
};

struct ForumThread {
    std::string thread_id;
    ThreadStructure structure = ThreadStructure::mooc;
    std::vector<Post> posts;  // ascending by timestamp
};

/// Normalized, filtered corpus. Immutable after construction; safe to share
/// across threads read-only.
struct ForumCorpus {
    std::string course_id;
    int64_t start_time = 0;
    int64_t end_time = 0;
    std::vector<ForumThread> threads;
    std::vector<std::string> learners;  // sorted, deduplicated

    size_t post_count() const {
        size_t n = 0;
        for (const auto& t : threads) n += t.posts.size();
        return n;
    }
};

struct ParseResult {
    std::vector<ForumThread> threads;
    size_t skipped_missing_timestamp = 0;
};

using Roster = std::map<std::string, Role>;

struct CorpusStats {
    size_t users = 0;
    size_t threads = 0;
    size_t posts = 0;
    uint64_t learner_pairs = 0;
    double duration_weeks = 0.0;
};

namespace detail {

inline void sort_thread_posts(ForumThread& t) {
    std::stable_sort(t.posts.begin(), t.posts.end(),
                     [](const Post& a, const Post& b) { return a.timestamp < b.timestamp; });
}

inline std::string json_string_field(const nlohmann::json& j, const char* field,
                                     const std::string& thread_id) {
    if (!j.contains(field) || !j[field].is_string())
        fail("malformed record in thread '", thread_id, "': missing or non-string field '",
             field, "'");
    return j[field].get<std::string>();
}

/// Timestamp is the one field whose absence skips the record instead of
/// failing the parse.
inline bool json_timestamp(const nlohmann::json& j, int64_t* out) {
    if (!j.contains("timestamp") || !j["timestamp"].is_number()) return false;
    *out = j["timestamp"].get<int64_t>();
    return true;
}

inline bool json_bool_or(const nlohmann::json& j, const char* field, bool dflt) {
    if (!j.contains(field)) return dflt;
    return j[field].get<bool>();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// MOOC export: threads -> posts -> comments. Posts and comments are not
// distinguished downstream; both become Post records.
//
//   { "threads": [ { "thread_id": "...",
//                    "posts": [ { "post_id", "author_id", "timestamp",
//                                 "body", "anonymous",
//                                 "comments": [ {same fields} ] } ] } ] }
// ---------------------------------------------------------------------------

inline ParseResult parse_mooc_export(const std::string& raw) {
    nlohmann::json root;
    try {
        root = nlohmann::json::parse(raw);
    } catch (const nlohmann::json::exception& e) {
        fail("MOOC export is not valid JSON: ", e.what());
    }
    require(root.contains("threads") && root["threads"].is_array(),
            "MOOC export missing 'threads' array");

    ParseResult result;
    for (const auto& jt : root["threads"]) {
        std::string tid = detail::json_string_field(jt, "thread_id", "?");
        ForumThread thread;
        thread.thread_id = tid;
        thread.structure = ThreadStructure::mooc;

        auto add_post = [&](const nlohmann::json& jp, const char* id_field) {
            Post p;
            p.thread_id = tid;
            p.post_id = detail::json_string_field(jp, id_field, tid);
            p.author_id = detail::json_string_field(jp, "author_id", tid);
            if (!detail::json_timestamp(jp, &p.timestamp)) {
                ++result.skipped_missing_timestamp;
                return;
            }
            p.body = jp.contains("body") ? jp["body"].get<std::string>() : std::string();
            p.anonymous = detail::json_bool_or(jp, "anonymous", false);
            thread.posts.push_back(std::move(p));
        };

        if (!jt.contains("posts") || !jt["posts"].is_array())
            fail("malformed record in thread '", tid, "': missing or non-array field 'posts'");
        for (const auto& jp : jt["posts"]) {
            add_post(jp, "post_id");
            if (jp.contains("comments")) {
                require(jp["comments"].is_array(), "malformed record in thread '", tid,
                        "': field 'comments' is not an array");
                for (const auto& jc : jp["comments"]) add_post(jc, "comment_id");
            }
        }
        detail::sort_thread_posts(thread);
        result.threads.push_back(std::move(thread));
    }
    return result;
}

// ---------------------------------------------------------------------------
// Q&A export: question, collaborative answers, follow-ups. Everything after
// the question is a post. A multi-author answer block yields one Post per
// contributing author; when a contribution carries no timestamp of its own,
// the block's last_edit time is used.
//
//   { "threads": [ { "thread_id": "...",
//                    "question": {post fields},
//                    "answers": [ { "answer_id", "last_edit",
//                                   "contributions": [ { "author_id",
//                                       "timestamp"?, "body", "anonymous" } ] } ],
//                    "followups": [ {post fields, "replies": [...] } ] } ] }
// ---------------------------------------------------------------------------

inline ParseResult parse_qa_export(const std::string& raw) {
    nlohmann::json root;
    try {
        root = nlohmann::json::parse(raw);
    } catch (const nlohmann::json::exception& e) {
        fail("Q&A export is not valid JSON: ", e.what());
    }
    require(root.contains("threads") && root["threads"].is_array(),
            "Q&A export missing 'threads' array");

    ParseResult result;
    for (const auto& jt : root["threads"]) {
        std::string tid = detail::json_string_field(jt, "thread_id", "?");
        ForumThread thread;
        thread.thread_id = tid;
        thread.structure = ThreadStructure::qa;

        auto add_simple = [&](const nlohmann::json& jp, const std::string& fallback_id) {
            Post p;
            p.thread_id = tid;
            p.post_id = jp.contains("post_id") && jp["post_id"].is_string()
                            ? jp["post_id"].get<std::string>()
                            : fallback_id;
            p.author_id = detail::json_string_field(jp, "author_id", tid);
            if (!detail::json_timestamp(jp, &p.timestamp)) {
                ++result.skipped_missing_timestamp;
                return;
            }
            p.body = jp.contains("body") ? jp["body"].get<std::string>() : std::string();
            p.anonymous = detail::json_bool_or(jp, "anonymous", false);
            thread.posts.push_back(std::move(p));
        };

        if (!jt.contains("question"))
            fail("malformed record in thread '", tid, "': missing field 'question'");
        add_simple(jt["question"], tid + "/q");

        if (jt.contains("answers")) {
            require(jt["answers"].is_array(), "malformed record in thread '", tid,
                    "': field 'answers' is not an array");
            size_t ai = 0;
            for (const auto& ja : jt["answers"]) {
                std::string aid = ja.contains("answer_id") && ja["answer_id"].is_string()
                                      ? ja["answer_id"].get<std::string>()
                                      : tid + "/a" + std::to_string(ai);
                if (!ja.contains("contributions") || !ja["contributions"].is_array())
                    fail("malformed record in thread '", tid,
                         "': answer missing 'contributions' array");
                int64_t last_edit = 0;
                bool has_last_edit = ja.contains("last_edit") && ja["last_edit"].is_number();
                if (has_last_edit) last_edit = ja["last_edit"].get<int64_t>();
                size_t ci = 0;
                for (const auto& jc : ja["contributions"]) {
                    Post p;
                    p.thread_id = tid;
                    p.post_id = aid + "/c" + std::to_string(ci);
                    p.author_id = detail::json_string_field(jc, "author_id", tid);
                    if (!detail::json_timestamp(jc, &p.timestamp)) {
                        if (!has_last_edit) {
                            ++result.skipped_missing_timestamp;
                            ++ci;
                            continue;
                        }
                        p.timestamp = last_edit;
                    }
                    p.body = jc.contains("body") ? jc["body"].get<std::string>() : std::string();
                    p.anonymous = detail::json_bool_or(jc, "anonymous", false);
                    thread.posts.push_back(std::move(p));
                    ++ci;
                }
                ++ai;
            }
        }

        // Follow-ups may nest replies; flatten recursively.
        std::function<void(const nlohmann::json&, const std::string&)> add_followups =
            [&](const nlohmann::json& arr, const std::string& prefix) {
                size_t fi = 0;
                for (const auto& jf : arr) {
                    add_simple(jf, prefix + "/f" + std::to_string(fi));
                    if (jf.contains("replies")) {
                        require(jf["replies"].is_array(), "malformed record in thread '", tid,
                                "': field 'replies' is not an array");
                        add_followups(jf["replies"], prefix + "/f" + std::to_string(fi));
                    }
                    ++fi;
                }
            };
        if (jt.contains("followups")) {
            require(jt["followups"].is_array(), "malformed record in thread '", tid,
                    "': field 'followups' is not an array");
            add_followups(jt["followups"], tid);
        }

        detail::sort_thread_posts(thread);
        result.threads.push_back(std::move(thread));
    }
    return result;
}

// ---------------------------------------------------------------------------
// Normalized corpus format: JSON lines, one post per line, preceded by a
// header line. UTF-8. Fields: post_id, thread_id, author_id, timestamp,
// anonymous, role, body (+ structure tag per thread).
// ---------------------------------------------------------------------------

inline std::string write_corpus(const ForumCorpus& corpus) {
    nlohmann::json header;
    header["sln_corpus"] = 1;
    header["course_id"] = corpus.course_id;
    header["start_time"] = corpus.start_time;
    header["end_time"] = corpus.end_time;
    std::ostringstream os;
    os << header.dump() << "\n";
    for (const auto& t : corpus.threads) {
        for (const auto& p : t.posts) {
            nlohmann::json j;
            j["post_id"] = p.post_id;
            j["thread_id"] = p.thread_id;
            j["author_id"] = p.author_id;
            j["timestamp"] = p.timestamp;
            j["anonymous"] = p.anonymous;
            j["role"] = role_to_string(p.author_role);
            j["body"] = p.body;
            j["structure"] = t.structure == ThreadStructure::qa ? "qa" : "mooc";
            os << j.dump() << "\n";
        }
    }
    return os.str();
}

inline ForumCorpus read_corpus(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), "empty corpus file");
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        fail("corpus header is not valid JSON: ", e.what());
    }
    require(header.contains("sln_corpus"), "not a normalized corpus file (missing version tag)");
    require(header["sln_corpus"].get<int>() == 1, "unsupported corpus version");

    ForumCorpus corpus;
    corpus.course_id = header.value("course_id", std::string());
    corpus.start_time = header["start_time"].get<int64_t>();
    corpus.end_time = header["end_time"].get<int64_t>();
    require(corpus.end_time > corpus.start_time, "corpus window empty: end_time <= start_time");

    std::map<std::string, ForumThread> threads;
    std::set<std::string> learners;
    size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            fail("corpus line ", lineno, " is not valid JSON: ", e.what());
        }
        Post p;
        p.post_id = j["post_id"].get<std::string>();
        p.thread_id = j["thread_id"].get<std::string>();
        p.author_id = j["author_id"].get<std::string>();
        p.timestamp = j["timestamp"].get<int64_t>();
        p.anonymous = j["anonymous"].get<bool>();
        p.author_role = role_from_string(j["role"].get<std::string>());
        p.body = j["body"].get<std::string>();
        auto& t = threads[p.thread_id];
        t.thread_id = p.thread_id;
        if (j.value("structure", "mooc") == std::string("qa")) t.structure = ThreadStructure::qa;
        if (p.author_role == Role::learner && !p.anonymous) learners.insert(p.author_id);
        t.posts.push_back(std::move(p));
    }
    for (auto& [tid, t] : threads) {
        detail::sort_thread_posts(t);
        corpus.threads.push_back(std::move(t));
    }
    corpus.learners.assign(learners.begin(), learners.end());
    return corpus;
}

// ---------------------------------------------------------------------------
// Roster: CSV lines "author_id,role".
// ---------------------------------------------------------------------------

inline Roster read_roster(const std::string& text) {
    Roster roster;
    std::istringstream in(text);
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        auto parts = split(t, ',');
        require(parts.size() == 2, "roster line ", lineno, ": expected 'author_id,role'");
        roster[trim(parts[0])] = role_from_string(trim(parts[1]));
    }
    return roster;
}

// ---------------------------------------------------------------------------
// Filtering per the data-preparation rules: drop instructor-authored posts,
// anonymous posts, and posts outside the course window; drop learners left
// with no posts. Authors absent from the roster are treated as learners.
// ---------------------------------------------------------------------------

inline ForumCorpus filter_corpus(const std::vector<ForumThread>& threads,
                                 const std::string& course_id, int64_t start_time,
                                 int64_t end_time, const Roster& roster) {
    require(end_time > start_time, "course window empty: end <= start");
    ForumCorpus corpus;
    corpus.course_id = course_id;
    corpus.start_time = start_time;
    corpus.end_time = end_time;

    std::set<std::string> learners;
    std::set<std::string> seen_post_ids;
    for (const auto& t : threads) {
        ForumThread kept;
        kept.thread_id = t.thread_id;
        kept.structure = t.structure;
        for (const auto& p : t.posts) {
            Post q = p;
            auto it = roster.find(q.author_id);
            q.author_role = it == roster.end() ? Role::learner : it->second;
            if (q.author_role == Role::instructor) continue;
            if (q.anonymous) continue;
            if (q.timestamp < start_time || q.timestamp > end_time) continue;
            require(seen_post_ids.insert(q.post_id).second, "duplicate post_id '", q.post_id,
                    "' in thread '", t.thread_id, "'");
            learners.insert(q.author_id);
            kept.posts.push_back(std::move(q));
        }
        if (!kept.posts.empty()) {
            detail::sort_thread_posts(kept);
            corpus.threads.push_back(std::move(kept));
        }
    }
    require(!corpus.threads.empty(), "empty corpus: no posts remain after filtering");
    corpus.learners.assign(learners.begin(), learners.end());
    return corpus;
}

inline CorpusStats corpus_stats(const ForumCorpus& corpus) {
    CorpusStats s;
    s.users = corpus.learners.size();
    s.threads = corpus.threads.size();
    s.posts = corpus.post_count();
    uint64_t n = corpus.learners.size();
    s.learner_pairs = n * (n - 1) / 2;
    s.duration_weeks =
        static_cast<double>(corpus.end_time - corpus.start_time) / (7.0 * 24 * 3600);
    return s;
}

// ---------------------------------------------------------------------------
// ISO 8601 -> epoch seconds (UTC). Accepts YYYY-MM-DD and
// YYYY-MM-DDTHH:MM:SS with optional trailing 'Z'.
// ---------------------------------------------------------------------------

inline int64_t iso8601_to_epoch(const std::string& iso) {
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, se = 0;
    std::string s = trim(iso);
    if (!s.empty() && (s.back() == 'Z' || s.back() == 'z')) s.pop_back();
    int n = std::sscanf(s.c_str(), "%d-%d-%dT%d:%d:%d", &y, &mo, &d, &h, &mi, &se);
    if (n < 3) n = std::sscanf(s.c_str(), "%d-%d-%d %d:%d:%d", &y, &mo, &d, &h, &mi, &se);
    require(n >= 3, "cannot parse ISO 8601 timestamp '", iso, "'");
    require(mo >= 1 && mo <= 12 && d >= 1 && d <= 31, "timestamp out of range: '", iso, "'");
    // Days from civil date (proleptic Gregorian), Howard Hinnant's algorithm.
    int64_t yy = y - (mo <= 2 ? 1 : 0);
    int64_t era = (yy >= 0 ? yy : yy - 399) / 400;
    int64_t yoe = yy - era * 400;
    int64_t doy = (153 * (mo + (mo > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    int64_t doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    int64_t days = era * 146097 + doe - 719468;
    return days * 86400 + h * 3600 + mi * 60 + se;
}

}  // namespace sln

#endif  // SLN_CORPUS_HPP_
