#include "ein/lexicon.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "ein/errors.hpp"

namespace ein {

std::string to_lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

bool is_canonical_emotion(const std::string& name) {
    const auto& reg = canonical_emotions();
    return std::find(reg.begin(), reg.end(), name) != reg.end();
}

bool LexiconSchema::has_emotion(const std::string& e) const {
    return std::find(emotions.begin(), emotions.end(), e) != emotions.end();
}

const std::vector<LexiconSchema>& builtin_schemas() {
    // Inventories are a reconstruction of the published per-lexicon category
    // sets; every name maps into the canonical registry. LIWC's "positive
    // emotion"/"negative emotion" appear here as pos_emo/neg_emo.
    static const std::vector<LexiconSchema> kSchemas = {
        {"EmoSenticNet", {"joy", "sadness", "anger", "fear", "disgust", "surprise"}},
        {"EmoLex",
         {"joy", "sadness", "anger", "fear", "disgust", "surprise", "anticipation", "trust"}},
        {"SentiSense",
         {"joy", "sadness", "anger", "fear", "disgust", "surprise", "love", "hope", "calmness",
          "despair", "hate", "like", "anticipation", "ambiguous"}},
        {"LIWC", {"sadness", "anger", "pos_emo", "neg_emo"}},
        {"Empath", {"love", "joy", "surprise", "anger", "sadness", "fear"}},
    };
    return kSchemas;
}

std::optional<LexiconSchema> schema_by_name(const std::string& name) {
    for (const auto& s : builtin_schemas())
        if (s.name == name) return s;
    return std::nullopt;
}

const std::set<std::string>& Lexicon::lookup(const std::string& token) const {
    static const std::set<std::string> kEmpty;
    auto it = entries_.find(to_lower(token));
    return it == entries_.end() ? kEmpty : it->second;
}

std::uint32_t Lexicon::lookup_mask(const std::string& token) const {
    auto it = masks_.find(to_lower(token));
    return it == masks_.end() ? 0u : it->second;
}

void Lexicon::add(const std::string& word, const std::string& emotion) {
    if (!schema_.has_emotion(emotion))
        throw ValidationError("lexicon '" + schema_.name + "': emotion '" + emotion +
                              "' is not in the schema");
    std::string w = to_lower(word);
    if (w.empty() || w.find_first_of(" \t") != std::string::npos)
        throw ValidationError("lexicon entry must be a single non-empty token: '" + word + "'");
    entries_[w].insert(emotion);
    auto idx = std::find(schema_.emotions.begin(), schema_.emotions.end(), emotion) -
               schema_.emotions.begin();
    masks_[w] |= (1u << idx);
}

bool Lexicon::operator==(const Lexicon& other) const {
    return schema_.name == other.schema_.name && schema_.emotions == other.schema_.emotions &&
           entries_ == other.entries_;
}

Lexicon load_lexicon(const std::string& path, const LexiconSchema& schema) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open lexicon file: " + path);

    Lexicon lex(schema);
    std::string line;
    std::size_t lineno = 0;
    bool saw_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            const std::string kHeader = "#schema:";
            if (line.rfind(kHeader, 0) == 0) {
                std::string name = line.substr(kHeader.size());
                name.erase(0, name.find_first_not_of(" \t"));
                name.erase(name.find_last_not_of(" \t") + 1);
                if (name != schema.name)
                    throw ValidationError(path + ":" + std::to_string(lineno) +
                                          ": schema header '" + name +
                                          "' does not match expected '" + schema.name + "'");
                saw_header = true;
            }
            continue;
        }
        auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0 || tab + 1 >= line.size())
            throw ParseError(path + ":" + std::to_string(lineno) +
                             ": expected 'word<TAB>emotion', got: " + line);
        std::string word = line.substr(0, tab);
        std::string emotion = line.substr(tab + 1);
        try {
            lex.add(word, emotion);
        } catch (const ValidationError& e) {
            throw ValidationError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (!saw_header && lex.size() > 0)
        throw ValidationError(path + ": missing required '#schema: " + schema.name + "' header");
    return lex;
}

std::size_t feature_dimension(const std::vector<Lexicon>& lexicons) {
    std::size_t q = 0;
    for (const auto& l : lexicons) q += l.dimension();
    return q;
}

}  // namespace ein
