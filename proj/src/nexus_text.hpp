#pragma once

// NEXUS lexical helpers shared by the distance and split writers/readers.

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace corrnet::nexus {

/// Single-quoted label with embedded quotes doubled.
std::string quote(std::string_view label);

void write_taxa_block(std::ostream& out, const std::vector<std::string>& labels);

struct Token {
    enum class Kind { Word, Quoted, Punct, Comment, End };
    Kind kind = Kind::End;
    std::string text;
    std::size_t line = 0;
};

/// Splits NEXUS text into words, quoted labels, punctuation (; , =) and
/// bracket comments. Throws ParseError on unterminated quotes or comments.
std::vector<Token> tokenize(std::string_view text);

/// Case-insensitive ASCII comparison.
bool iequals(std::string_view a, std::string_view b);

} // namespace corrnet::nexus
