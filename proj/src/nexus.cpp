#include "corrnet/nexus.hpp"

#include "csv.hpp"
#include "nexus_text.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <optional>
#include <sstream>

namespace corrnet {

namespace nexus {

std::string quote(std::string_view label)
{
    std::string out = "'";
    for (char c : label) {
        out += c;
        if (c == '\'')
            out += '\'';
    }
    out += '\'';
    return out;
}

void write_taxa_block(std::ostream& out, const std::vector<std::string>& labels)
{
    out << "#nexus\n\nBEGIN Taxa;\nDIMENSIONS ntax=" << labels.size() << ";\nTAXLABELS\n";
    for (std::size_t i = 0; i < labels.size(); ++i)
        out << '[' << i + 1 << "] " << quote(labels[i]) << '\n';
    out << ";\nEND; [Taxa]\n\n";
}

bool iequals(std::string_view a, std::string_view b)
{
    return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
               return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
           });
}

std::vector<Token> tokenize(std::string_view text)
{
    std::vector<Token> out;
    std::size_t line = 1;
    std::size_t i = 0;
    while (i < text.size()) {
        const char c = text[i];
        if (c == '\n') {
            ++line;
            ++i;
        } else if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
        } else if (c == '[') {
            const std::size_t start_line = line;
            std::size_t depth = 0;
            std::string body;
            for (; i < text.size(); ++i) {
                if (text[i] == '\n')
                    ++line;
                if (text[i] == '[' && depth++ == 0)
                    continue;
                if (text[i] == ']' && --depth == 0)
                    break;
                body += text[i];
            }
            if (i >= text.size())
                throw ParseError("unterminated comment", start_line);
            ++i;
            out.push_back({Token::Kind::Comment, body, start_line});
        } else if (c == '\'') {
            std::string body;
            ++i;
            while (true) {
                if (i >= text.size())
                    throw ParseError("unterminated quoted label", line);
                if (text[i] == '\'') {
                    if (i + 1 < text.size() && text[i + 1] == '\'') {
                        body += '\'';
                        i += 2;
                        continue;
                    }
                    ++i;
                    break;
                }
                if (text[i] == '\n')
                    ++line;
                body += text[i++];
            }
            out.push_back({Token::Kind::Quoted, body, line});
        } else if (c == ';' || c == ',' || c == '=') {
            out.push_back({Token::Kind::Punct, std::string(1, c), line});
            ++i;
        } else {
            std::string word;
            while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i])) &&
                   std::string_view(";,=['").find(text[i]) == std::string_view::npos)
                word += text[i++];
            out.push_back({Token::Kind::Word, word, line});
        }
    }
    out.push_back({Token::Kind::End, "", line});
    return out;
}

} // namespace nexus

std::string export_nexus(const WeightedSplitSystem& system, const std::vector<std::string>& labels)
{
    const std::size_t n = system.taxa();
    if (labels.size() != n)
        throw ValidationError("export needs " + std::to_string(n) + " labels, got " + std::to_string(labels.size()));

    std::ostringstream out;
    nexus::write_taxa_block(out, labels);
    out << "BEGIN St_Splits;\n";
    out << "DIMENSIONS ntax=" << n << " nsplits=" << system.splits.size() << ";\n";
    out << "FORMAT labels=no weights=yes confidences=no intervals=no;\n";
    out << "PROPERTIES cyclic;\n";
    out << "[fit_residual=" << csv::format(system.fit_residual) << "]\n";
    out << "CYCLE";
    for (auto t : system.ordering.taxa)
        out << ' ' << t + 1;
    out << ";\nMATRIX\n";
    for (std::size_t k = 0; k < system.splits.size(); ++k) {
        const auto& s = system.splits[k];
        out << '[' << k + 1 << ", size=" << arc_size(s.split) << "]\t" << csv::format(s.weight) << '\t';
        const auto members = split_members(s.split, system.ordering);
        for (std::size_t i = 0; i < members.size(); ++i)
            out << (i ? " " : "") << members[i] + 1;
        out << ",\n";
    }
    out << ";\nEND; [St_Splits]\n";
    return out.str();
}

namespace {

using nexus::Token;
using nexus::iequals;

class Reader {
public:
    explicit Reader(std::vector<Token> tokens) : t_(std::move(tokens)) {}

    const Token& peek() { return t_[pos_]; }

    /// Next non-comment token; comments are collected on the way.
    const Token& next()
    {
        skip_comments();
        const Token& tok = t_[pos_];
        if (tok.kind != Token::Kind::End)
            ++pos_;
        return tok;
    }

    void skip_comments()
    {
        while (t_[pos_].kind == Token::Kind::Comment)
            comments_.push_back(t_[pos_++].text);
    }

    const Token& expect_word(std::string_view word)
    {
        const Token& tok = next();
        if (tok.kind != Token::Kind::Word || !iequals(tok.text, word))
            throw ParseError("expected '" + std::string(word) + "', got '" + tok.text + "'", tok.line);
        return tok;
    }

    void expect_punct(char c)
    {
        const Token& tok = next();
        if (tok.kind != Token::Kind::Punct || tok.text[0] != c)
            throw ParseError(std::string("expected '") + c + "', got '" + tok.text + "'", tok.line);
    }

    bool at_punct(char c)
    {
        skip_comments();
        return t_[pos_].kind == Token::Kind::Punct && t_[pos_].text[0] == c;
    }

    /// Skips to and past the next ';'.
    void skip_statement()
    {
        while (true) {
            const Token& tok = next();
            if (tok.kind == Token::Kind::End)
                throw ParseError("unexpected end of input", tok.line);
            if (tok.kind == Token::Kind::Punct && tok.text == ";")
                return;
        }
    }

    std::size_t integer()
    {
        const Token& tok = next();
        std::size_t v = 0;
        auto [ptr, ec] = std::from_chars(tok.text.data(), tok.text.data() + tok.text.size(), v);
        if (tok.kind != Token::Kind::Word || ec != std::errc{} || ptr != tok.text.data() + tok.text.size())
            throw ParseError("expected integer, got '" + tok.text + "'", tok.line);
        return v;
    }

    double real()
    {
        const Token& tok = next();
        const auto v = tok.kind == Token::Kind::Word ? csv::to_double(tok.text) : std::nullopt;
        if (!v)
            throw ParseError("expected number, got '" + tok.text + "'", tok.line);
        return *v;
    }

    /// `key=value` pairs up to ';'.
    std::vector<std::pair<std::string, std::string>> settings()
    {
        std::vector<std::pair<std::string, std::string>> out;
        while (!at_punct(';')) {
            const Token& key = next();
            if (key.kind == Token::Kind::End)
                throw ParseError("unexpected end of input", key.line);
            std::string value;
            if (at_punct('=')) {
                next();
                value = next().text;
            }
            out.emplace_back(key.text, value);
        }
        next();
        return out;
    }

    std::vector<std::string>& comments() { return comments_; }

private:
    std::vector<Token> t_;
    std::size_t pos_ = 0;
    std::vector<std::string> comments_;
};

std::optional<std::string> setting(const std::vector<std::pair<std::string, std::string>>& s, std::string_view key)
{
    for (const auto& [k, v] : s)
        if (iequals(k, key))
            return v;
    return std::nullopt;
}

std::size_t to_size(const std::optional<std::string>& v, std::string_view what)
{
    std::size_t out = 0;
    if (!v || std::from_chars(v->data(), v->data() + v->size(), out).ec != std::errc{})
        throw ParseError("missing or bad " + std::string(what));
    return out;
}

} // namespace

ParsedSplits parse_nexus(std::string_view text)
{
    ParsedSplits result;
    std::optional<std::size_t> ntax;
    bool have_splits = false;

    Reader r(nexus::tokenize(text));
    r.expect_word("#nexus");
    while (true) {
        const Token& begin = r.next();
        if (begin.kind == Token::Kind::End)
            break;
        if (begin.kind != Token::Kind::Word || !iequals(begin.text, "begin"))
            throw ParseError("expected BEGIN, got '" + begin.text + "'", begin.line);
        const std::string block = r.next().text;
        r.expect_punct(';');

        if (iequals(block, "taxa")) {
            while (true) {
                const Token& cmd = r.next();
                if (iequals(cmd.text, "end") || iequals(cmd.text, "endblock")) {
                    r.expect_punct(';');
                    break;
                }
                if (iequals(cmd.text, "dimensions")) {
                    ntax = to_size(setting(r.settings(), "ntax"), "ntax");
                } else if (iequals(cmd.text, "taxlabels")) {
                    while (!r.at_punct(';')) {
                        const Token& label = r.next();
                        if (label.kind != Token::Kind::Word && label.kind != Token::Kind::Quoted)
                            throw ParseError("bad taxon label", label.line);
                        result.labels.push_back(label.text);
                    }
                    r.next();
                } else if (cmd.kind == Token::Kind::End) {
                    throw ParseError("unterminated TAXA block", cmd.line);
                } else {
                    r.skip_statement();
                }
            }
            if (!ntax || *ntax != result.labels.size())
                throw ParseError("TAXA block ntax does not match its labels");
        } else if (iequals(block, "st_splits") || iequals(block, "splits")) {
            if (!ntax)
                throw ParseError("splits block before TAXA block");
            const std::size_t n = *ntax;
            std::size_t nsplits = 0;
            std::vector<std::size_t> cycle;
            std::vector<std::pair<double, std::vector<std::size_t>>> rows;
            while (true) {
                const Token& cmd = r.next();
                if (iequals(cmd.text, "end") || iequals(cmd.text, "endblock")) {
                    r.expect_punct(';');
                    break;
                }
                if (cmd.kind == Token::Kind::End)
                    throw ParseError("unterminated splits block", cmd.line);
                if (iequals(cmd.text, "dimensions")) {
                    const auto s = r.settings();
                    if (to_size(setting(s, "ntax"), "ntax") != n)
                        throw ParseError("splits block ntax differs from TAXA block", cmd.line);
                    nsplits = to_size(setting(s, "nsplits"), "nsplits");
                } else if (iequals(cmd.text, "format")) {
                    const auto s = r.settings();
                    const auto labels = setting(s, "labels");
                    const auto weights = setting(s, "weights");
                    if ((labels && !iequals(*labels, "no")) || (weights && !iequals(*weights, "yes")))
                        throw ParseError("only labels=no weights=yes split matrices are supported", cmd.line);
                } else if (iequals(cmd.text, "cycle")) {
                    while (!r.at_punct(';'))
                        cycle.push_back(r.integer());
                    r.next();
                } else if (iequals(cmd.text, "matrix")) {
                    while (!r.at_punct(';')) {
                        const double w = r.real();
                        std::vector<std::size_t> members;
                        while (!r.at_punct(','))
                            members.push_back(r.integer());
                        r.next();
                        rows.emplace_back(w, std::move(members));
                    }
                    r.next();
                } else {
                    r.skip_statement();
                }
            }
            if (rows.size() != nsplits)
                throw ParseError("matrix has " + std::to_string(rows.size()) + " rows, nsplits=" + std::to_string(nsplits));
            if (cycle.size() != n)
                throw ParseError("CYCLE must list every taxon");
            for (auto& c : cycle) {
                if (c == 0 || c > n)
                    throw ParseError("CYCLE entry out of range");
                --c;
            }
            if (!is_permutation_of_n(cycle))
                throw ParseError("CYCLE is not a permutation of the taxa");
            result.system.ordering = CircularOrdering{cycle};
            const auto pos = result.system.ordering.positions();
            for (const auto& [w, members] : rows) {
                if (members.empty() || members.size() >= n)
                    throw ParseError("split side must be a proper non-empty subset");
                std::vector<std::size_t> p;
                for (auto m : members) {
                    if (m == 0 || m > n)
                        throw ParseError("split member out of range");
                    p.push_back(pos[m - 1]);
                }
                std::sort(p.begin(), p.end());
                if (std::adjacent_find(p.begin(), p.end()) != p.end())
                    throw ParseError("split lists a taxon twice");
                CircularSplit s;
                if (p.back() - p.front() + 1 == p.size()) {
                    s = make_split(p.front(), p.back(), n);
                } else {
                    // Side wraps through position 0: find the single gap.
                    std::size_t gap = 0;
                    for (std::size_t i = 1; i < p.size(); ++i)
                        if (p[i] != p[i - 1] + 1) {
                            if (gap)
                                throw ParseError("split is not circular for the CYCLE");
                            gap = i;
                        }
                    if (p.front() != 0 || p.back() != n - 1)
                        throw ParseError("split is not circular for the CYCLE");
                    s = make_split(p[gap], p[gap - 1], n);
                }
                result.system.splits.push_back({s, w});
            }
            have_splits = true;
        } else {
            while (true) {
                const Token& cmd = r.next();
                if (cmd.kind == Token::Kind::End)
                    throw ParseError("unterminated block " + block, cmd.line);
                if (iequals(cmd.text, "end") || iequals(cmd.text, "endblock")) {
                    r.expect_punct(';');
                    break;
                }
                if (!(cmd.kind == Token::Kind::Punct && cmd.text == ";"))
                    r.skip_statement();
            }
        }
    }
    if (!have_splits)
        throw ParseError("no splits block found");
    for (const auto& c : r.comments())
        if (c.rfind("fit_residual=", 0) == 0) {
            const auto v = csv::to_double(std::string_view(c).substr(13));
            if (!v)
                throw ParseError("bad fit_residual comment");
            result.system.fit_residual = *v;
        }
    return result;
}

} // namespace corrnet
