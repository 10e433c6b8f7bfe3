#include "gauntlet/desk_corpus.hpp"

#include <array>
#include <cctype>

namespace gauntlet::desk {

namespace {

using Rng = std::mt19937_64;

template <typename T, std::size_t N>
const T& pick(const std::array<T, N>& pool, Rng& rng) {
  return pool[rng() % N];
}

std::size_t below(Rng& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }

constexpr std::array<std::string_view, 40> kTopics{
    "the color pink", "renewable energy", "the structure of an atom", "regular exercise",
    "the water cycle", "machine learning", "the Roman Empire", "photosynthesis",
    "a balanced diet", "climate change", "the human heart", "social media",
    "public libraries", "the stock market", "urban gardening", "the solar system",
    "electric vehicles", "classical music", "remote work", "the immune system",
    "volcanic eruptions", "digital privacy", "coral reefs", "the printing press",
    "time management", "honey bees", "modern architecture", "the internet",
    "sleep hygiene", "ocean currents", "online education", "the French Revolution",
    "black holes", "recycling programs", "team sports", "the English language",
    "antibiotics", "rain forests", "personal finance", "space exploration"};

constexpr std::array<std::string_view, 36> kAdjectives{
    "important", "complex", "fascinating", "essential", "versatile", "powerful",
    "delicate", "widely recognized", "practical", "influential", "dynamic", "remarkable",
    "valuable", "significant", "diverse", "efficient", "sustainable", "intricate",
    "accessible", "reliable", "innovative", "beneficial", "common", "unique",
    "vibrant", "effective", "natural", "popular", "gentle", "robust", "flexible",
    "meaningful", "modern", "traditional", "distinctive", "useful"};

constexpr std::array<std::string_view, 40> kNouns{
    "health", "education", "technology", "creativity", "stability", "growth",
    "communication", "innovation", "safety", "efficiency", "balance", "energy",
    "community", "culture", "productivity", "knowledge", "comfort", "resilience",
    "happiness", "research", "transparency", "collaboration", "diversity", "quality",
    "tradition", "design", "nature", "science", "history", "security", "wellness",
    "progress", "independence", "curiosity", "sustainability", "learning", "trust",
    "discipline", "flexibility", "harmony"};

constexpr std::array<std::string_view, 30> kVerbs{
    "support", "improve", "shape", "influence", "protect", "reflect", "promote",
    "enhance", "transform", "strengthen", "connect", "inspire", "reduce", "explain",
    "encourage", "define", "provide", "create", "maintain", "affect", "drive",
    "require", "involve", "describe", "combine", "balance", "organize", "measure",
    "sustain", "represent"};

constexpr std::array<std::string_view, 36> kObjects{
    "daily routines", "the environment", "economic growth", "human behavior",
    "scientific research", "local communities", "long-term planning", "public health",
    "personal development", "global trade", "mental well-being", "everyday decisions",
    "the way people live", "future generations", "modern society", "many industries",
    "the natural world", "cultural identity", "individual choices", "social interactions",
    "physical fitness", "creative expression", "critical thinking", "energy consumption",
    "the quality of life", "access to information", "the global economy", "daily life",
    "learning outcomes", "public policy", "emotional health", "the food supply",
    "urban development", "career opportunities", "family life", "the job market"};

constexpr std::array<std::string_view, 16> kAudiences{
    "students", "researchers", "families", "businesses", "young people", "teachers",
    "local governments", "small communities", "healthcare workers", "engineers",
    "beginners", "older adults", "policy makers", "parents", "artists", "travelers"};

constexpr std::array<std::string_view, 12> kConnectives{
    "In addition", "Moreover", "Furthermore", "However", "As a result", "In general",
    "For this reason", "At the same time", "In many cases", "Additionally",
    "On the other hand", "Overall"};

constexpr std::array<std::string_view, 10> kSources{
    "widely recognized characteristics", "common knowledge", "available research",
    "general principles", "well-established facts", "historical records",
    "expert opinions", "published studies", "practical experience", "typical examples"};

std::string capitalize(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

std::string article_for(std::string_view word) {
  const char c = static_cast<char>(std::tolower(static_cast<unsigned char>(word.front())));
  return (c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u') ? "an" : "a";
}

std::string sentence(std::string_view topic, Rng& rng) {
  const std::string t(topic);
  const std::string adj1(pick(kAdjectives, rng));
  const std::string adj2(pick(kAdjectives, rng));
  const std::string adj3(pick(kAdjectives, rng));
  const std::string n1(pick(kNouns, rng));
  const std::string n2(pick(kNouns, rng));
  const std::string n3(pick(kNouns, rng));
  const std::string v1(pick(kVerbs, rng));
  const std::string v2(pick(kVerbs, rng));
  const std::string o1(pick(kObjects, rng));
  const std::string o2(pick(kObjects, rng));
  const std::string aud(pick(kAudiences, rng));
  const std::string conn(pick(kConnectives, rng));

  switch (below(rng, 12)) {
    case 0:
      return capitalize(t) + " is " + article_for(adj1) + " " + adj1 + " subject that can " + v1 +
             " " + o1 + ".";
    case 1:
      return "It is often associated with " + n1 + ", " + n2 + ", and " + n3 + ".";
    case 2:
      return conn + ", " + t + " can " + v1 + " " + o1 + ", which helps to " + v2 + " " + o2 + ".";
    case 3:
      return "However, it is important to note that " + t + " may also " + v1 + " " + o1 + ".";
    case 4:
      return "Overall, " + t + " is " + adj1 + ", " + adj2 + ", and " + adj3 + ".";
    case 5:
      return "There are several factors to consider, such as " + n1 + ", " + n2 + ", and " + n3 +
             ".";
    case 6:
      return "For " + aud + ", " + t + " is " + adj1 + " because it can " + v1 + " " + o1 + ".";
    case 7:
      return conn + ", many experts agree that " + t + " plays " + article_for(adj1) + " " + adj1 +
             " role in " + o1 + ".";
    case 8:
      return "By understanding " + t + ", " + aud + " can " + v1 + " " + o1 + " and " + v2 + " " +
             o2 + ".";
    case 9:
      return "It can also " + v1 + " " + o1 + ", especially when combined with " + n1 + " and " +
             n2 + ".";
    case 10:
      return "This makes it " + adj1 + " and " + adj2 + " for " + aud + ", as well as for " +
             pick(kAudiences, rng).data() + ".";
    default:
      return conn + ", " + t + " continues to " + v1 + " " + o1 + " in " + adj1 + " ways.";
  }
}

std::string text_about(std::string_view topic, Rng& rng) {
  std::string out;
  if (below(rng, 6) == 0) {
    out = "As an AI language model, I don't have personal experiences, but I can describe " +
          std::string(topic) + " based on " + std::string(pick(kSources, rng)) + ".";
  } else {
    out = sentence(topic, rng);
  }
  const std::size_t extra = 3 + below(rng, 3);
  for (std::size_t i = 0; i < extra; ++i) {
    out += ' ';
    out += sentence(topic, rng);
  }
  return out;
}

std::vector<std::size_t> byte_positions(std::string_view s, char c) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == c) out.push_back(i);
  }
  return out;
}

bool apply_slip(std::string& s, Rng& rng) {
  switch (below(rng, 11)) {
    case 0: case 1: case 2: case 3: case 4: case 5: {  // space before a comma
      const auto commas = byte_positions(s, ',');
      if (commas.empty()) return false;
      s.insert(commas[below(rng, commas.size())], " ");
      return true;
    }
    case 6: {  // space before a sentence-ending period
      std::vector<std::size_t> periods;
      for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '.' && (i + 1 == s.size() || s[i + 1] == ' ')) periods.push_back(i);
      }
      if (periods.empty()) return false;
      s.insert(periods[below(rng, periods.size())], " ");
      return true;
    }
    case 7: {  // doubled space
      const auto spaces = byte_positions(s, ' ');
      if (spaces.empty()) return false;
      s.insert(spaces[below(rng, spaces.size())], " ");
      return true;
    }
    case 8: {  // lowercase sentence start
      std::vector<std::size_t> starts;
      for (std::size_t i = 0; i < s.size(); ++i) {
        const bool at_start = i == 0 || (i >= 2 && s[i - 1] == ' ' && s[i - 2] == '.');
        if (at_start && std::isupper(static_cast<unsigned char>(s[i]))) starts.push_back(i);
      }
      if (starts.empty()) return false;
      const std::size_t i = starts[below(rng, starts.size())];
      s[i] = static_cast<char>(std::tolower(static_cast<unsigned char>(s[i])));
      return true;
    }
    case 9: {  // transposed letters inside a word
      std::vector<std::size_t> pairs;
      for (std::size_t i = 1; i + 2 < s.size(); ++i) {
        if (std::islower(static_cast<unsigned char>(s[i])) &&
            std::islower(static_cast<unsigned char>(s[i + 1])) && s[i] != s[i + 1] &&
            std::isalpha(static_cast<unsigned char>(s[i - 1])) &&
            std::isalpha(static_cast<unsigned char>(s[i + 2]))) {
          pairs.push_back(i);
        }
      }
      if (pairs.empty()) return false;
      const std::size_t i = pairs[below(rng, pairs.size())];
      std::swap(s[i], s[i + 1]);
      return true;
    }
    default: {  // missing space after a comma
      std::vector<std::size_t> gaps;
      for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        if (s[i] == ',' && s[i + 1] == ' ') gaps.push_back(i + 1);
      }
      if (gaps.empty()) return false;
      s.erase(gaps[below(rng, gaps.size())], 1);
      return true;
    }
  }
}

std::string question_for(std::string_view topic) {
  return "Describe " + std::string(topic) + ".";
}

}  // namespace

std::string ai_like_text(std::mt19937_64& rng) {
  return text_about(pick(kTopics, rng), rng);
}

std::string add_human_noise(std::string_view clean, std::mt19937_64& rng) {
  std::string s(clean);
  for (int guard = 0; guard < 64; ++guard) {
    if (apply_slip(s, rng)) break;
  }
  return s;
}

std::vector<Document> ai_like_documents(std::size_t count, std::uint64_t seed,
                                        std::string_view id_prefix) {
  Rng rng(seed);
  std::vector<Document> docs;
  docs.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::string_view topic = pick(kTopics, rng);
    Document d;
    d.id = std::string(id_prefix) + "-" + std::to_string(i);
    d.question = question_for(topic);
    d.text = text_about(topic, rng);
    d.origin = Origin::AiGenerated;
    docs.push_back(std::move(d));
  }
  return docs;
}

std::vector<Document> human_like_documents(std::size_t count, std::uint64_t seed,
                                           std::string_view id_prefix) {
  Rng rng(seed);
  std::vector<Document> docs;
  docs.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::string_view topic = pick(kTopics, rng);
    Document d;
    d.id = std::string(id_prefix) + "-" + std::to_string(i);
    d.question = question_for(topic);
    d.text = add_human_noise(text_about(topic, rng), rng);
    d.origin = Origin::HumanWritten;
    docs.push_back(std::move(d));
  }
  return docs;
}

std::vector<std::string> clean_corpus(std::size_t min_bytes, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::string> out;
  std::size_t bytes = 0;
  while (bytes < min_bytes) {
    out.push_back(ai_like_text(rng));
    bytes += out.back().size();
  }
  return out;
}

bool has_space_before_comma(std::string_view text) {
  const std::u32string cps = decode_utf8(text);
  for (std::size_t i = 1; i < cps.size(); ++i) {
    if (cps[i] == U',' && is_space(cps[i - 1])) return true;
  }
  return false;
}

}  // namespace gauntlet::desk
