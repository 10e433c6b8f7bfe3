#include "gauntlet/corpus_io.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "gauntlet/error.hpp"
#include "gauntlet/serial.hpp"

namespace gauntlet {

std::vector<Document> read_corpus(const std::filesystem::path& path, Origin origin) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot read corpus " + path.string());
  const bool jsonl = path.extension() == ".jsonl";
  const std::string stem = path.stem().string();

  std::vector<Document> docs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim_whitespace(line).empty()) continue;
    Document d;
    d.origin = origin;
    if (jsonl) {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::Data, path.string() + ":" + std::to_string(line_no) +
                                         ": malformed JSON: " + e.what());
      }
      if (!j.is_object() || !j.contains("text") || !j["text"].is_string()) {
        throw Error(ErrorKind::Data, path.string() + ":" + std::to_string(line_no) +
                                         ": missing string field \"text\"");
      }
      d.text = j["text"].get<std::string>();
      if (j.contains("id")) {
        d.id = j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump();
      }
    } else {
      d.text = line;
    }
    if (!is_valid_utf8(d.text)) {
      throw Error(ErrorKind::Encoding,
                  path.string() + ":" + std::to_string(line_no) + ": invalid UTF-8");
    }
    if (d.id.empty()) d.id = stem + "-" + std::to_string(docs.size());
    docs.push_back(std::move(d));
  }
  if (docs.empty()) throw Error(ErrorKind::Data, "corpus " + path.string() + " is empty");
  return docs;
}

void write_corpus_jsonl(const std::filesystem::path& path, const std::vector<Document>& docs) {
  std::string out;
  for (const Document& d : docs) {
    nlohmann::json j = {{"id", d.id}, {"text", d.text}};
    if (!d.question.empty()) j["question"] = d.question;
    out += j.dump();
    out += '\n';
  }
  serial::write_file(path, out);
}

}  // namespace gauntlet
