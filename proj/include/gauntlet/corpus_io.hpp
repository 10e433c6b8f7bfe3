#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "gauntlet/text_core.hpp"

namespace gauntlet {

// A corpus file is either JSON Lines (".jsonl": objects with "text" and an
// optional "id") or plain UTF-8 text holding one document per non-blank line.
// Missing ids become "<stem>-<index>". Unreadable files are ErrorKind::Io;
// malformed content or an empty corpus is ErrorKind::Data.
std::vector<Document> read_corpus(const std::filesystem::path& path, Origin origin);

void write_corpus_jsonl(const std::filesystem::path& path, const std::vector<Document>& docs);

}  // namespace gauntlet
