#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hsc/uarch.hpp"

namespace hsc {

enum class Countermeasure { None, Seq, LoadDelay, Tt, NdaStrict, NdaPermissive };

Countermeasure parse_countermeasure(const std::string& s);
std::string countermeasure_name(Countermeasure c);
bool is_labelled(Countermeasure c);

// A label is a set of 1-based buffer indexes of unresolved branches; bit k
// stands for index k.
using Labels = std::vector<uint64_t>;

// Loads, stores and pc assignments (marked or not).
bool is_transmit(const Cmd& c);

// Eager load delay: a load may execute only when no earlier branch is unresolved.
bool loaddelay_allows(const Buffer& buf, const Directive& d);

// Bits of the tagged (unresolved) pc assignments in buf.
uint64_t unresolved_branches(const Buffer& buf);

// Union of the labels of the last writers in buf of the registers read by e.
uint64_t labels_of(const Buffer& buf, const Labels& labels, const ExprPtr& e);

// Replaces assignments with non-empty labels (empty labels when literal) by x <- bottom.
Buffer mask(const Buffer& buf, const Labels& labels, bool literal = false);

// tt: fetch masks, retire drops, execute masks only for transmit instructions.
Buffer tt_unlabel(const Buffer& buf, const Labels& labels, const Directive& d,
                  bool literal = false);
// NDA masks on every directive.
Buffer nda_unlabel(const Buffer& buf, const Labels& labels, bool literal = false);

// Labels for commands appended by a fetch onto (buf, labels).
Labels fetch_labels(Countermeasure cm, const Buffer& buf, const Labels& labels,
                    const std::vector<Cmd>& appended);

// Index i resolved: removed from every label.
void strip_label(Labels& labels, uint32_t i);
// Head retired: every index moves down by one, index 0 is discarded.
void decrement_labels(Labels& labels);

// Every index in every label must name an older tagged entry. Returns the problems found.
std::vector<std::string> check_label_hygiene(const Buffer& buf, const Labels& labels);

}  // namespace hsc
