#pragma once

#include <string>
#include <vector>

#include "hsc/analysis.hpp"

namespace hsc {

// Shipped μAsm programs. Memory layout shared by the bounds-check programs:
// the index y lives at address 0, array A at 4 (size_A = 2), array B at 8.
struct CorpusEntry {
  std::string name;
  std::string summary;
  std::string source;
  std::string domain;  // default enumeration domain
  std::string policy;  // default security policy
};

const std::vector<CorpusEntry>& corpus();
const CorpusEntry* find_corpus(const std::string& name);

NamedProgram corpus_program(const CorpusEntry& e);
std::vector<NamedProgram> corpus_programs();

}  // namespace hsc
