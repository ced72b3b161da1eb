#include "hsc/countermeasures.hpp"

#include <stdexcept>

namespace hsc {

Countermeasure parse_countermeasure(const std::string& s) {
  if (s == "none") return Countermeasure::None;
  if (s == "seq") return Countermeasure::Seq;
  if (s == "loaddelay") return Countermeasure::LoadDelay;
  if (s == "tt") return Countermeasure::Tt;
  if (s == "nda-strict") return Countermeasure::NdaStrict;
  if (s == "nda-permissive") return Countermeasure::NdaPermissive;
  throw std::invalid_argument("unknown countermeasure '" + s + "'");
}

std::string countermeasure_name(Countermeasure c) {
  switch (c) {
    case Countermeasure::None: return "none";
    case Countermeasure::Seq: return "seq";
    case Countermeasure::LoadDelay: return "loaddelay";
    case Countermeasure::Tt: return "tt";
    case Countermeasure::NdaStrict: return "nda-strict";
    case Countermeasure::NdaPermissive: return "nda-permissive";
  }
  return "?";
}

bool is_labelled(Countermeasure c) {
  return c == Countermeasure::Tt || c == Countermeasure::NdaStrict ||
         c == Countermeasure::NdaPermissive;
}

bool is_transmit(const Cmd& c) {
  return c.kind == Cmd::Kind::Load || c.kind == Cmd::Kind::Store || c.is_pc_assign();
}

bool loaddelay_allows(const Buffer& buf, const Directive& d) {
  if (d.kind != Directive::Kind::Execute || d.i == 0 || d.i > buf.size()) return true;
  if (buf[d.i - 1].kind != Cmd::Kind::Load) return true;
  for (uint32_t k = 0; k + 1 < d.i; ++k)
    if (buf[k].tag) return false;
  return true;
}

uint64_t unresolved_branches(const Buffer& buf) {
  uint64_t bits = 0;
  for (size_t k = 0; k < buf.size(); ++k)
    if (buf[k].tag) bits |= uint64_t{1} << (k + 1);
  return bits;
}

uint64_t labels_of(const Buffer& buf, const Labels& labels, const ExprPtr& e) {
  std::vector<RegId> regs;
  expr_regs(e, regs);
  uint64_t out = 0;
  for (RegId r : regs)
    for (size_t k = buf.size(); k-- > 0;) {
      const Cmd& c = buf[k];
      if ((c.kind == Cmd::Kind::Assign || c.kind == Cmd::Kind::Load) && c.x == r) {
        out |= labels[k];
        break;
      }
    }
  return out;
}

Buffer mask(const Buffer& buf, const Labels& labels, bool literal) {
  Buffer out = buf;
  static const ExprPtr bottom = e_const(Value::bot());
  for (size_t k = 0; k < out.size(); ++k)
    if (out[k].kind == Cmd::Kind::Assign && (literal ? labels[k] == 0 : labels[k] != 0))
      out[k].e = bottom;
  return out;
}

Buffer tt_unlabel(const Buffer& buf, const Labels& labels, const Directive& d, bool literal) {
  switch (d.kind) {
    case Directive::Kind::Fetch: return mask(buf, labels, literal);
    case Directive::Kind::Retire: return buf;
    case Directive::Kind::Execute:
      if (d.i >= 1 && d.i <= buf.size() && is_transmit(buf[d.i - 1]))
        return mask(buf, labels, literal);
      return buf;
  }
  return buf;
}

Buffer nda_unlabel(const Buffer& buf, const Labels& labels, bool literal) {
  return mask(buf, labels, literal);
}

Labels fetch_labels(Countermeasure cm, const Buffer& buf, const Labels& labels,
                    const std::vector<Cmd>& appended) {
  Labels out;
  uint64_t branches = unresolved_branches(buf);
  for (const Cmd& c : appended) {
    uint64_t l = 0;
    if (!c.is_pc_assign()) {
      switch (cm) {
        case Countermeasure::Tt:
          if (c.kind == Cmd::Kind::Load)
            l = branches;
          else if (c.kind == Cmd::Kind::Assign)
            l = labels_of(buf, labels, c.e);
          break;
        case Countermeasure::NdaStrict: l = branches; break;
        case Countermeasure::NdaPermissive:
          if (c.kind == Cmd::Kind::Load) l = branches;
          break;
        default: break;
      }
    }
    out.push_back(l);
  }
  return out;
}

void strip_label(Labels& labels, uint32_t i) {
  for (uint64_t& l : labels) l &= ~(uint64_t{1} << i);
}

void decrement_labels(Labels& labels) {
  for (uint64_t& l : labels) l = (l >> 1) & ~uint64_t{1};
}

std::vector<std::string> check_label_hygiene(const Buffer& buf, const Labels& labels) {
  std::vector<std::string> out;
  if (labels.size() != buf.size()) {
    out.push_back("label vector size differs from buffer size");
    return out;
  }
  for (size_t k = 0; k < buf.size(); ++k)
    for (uint32_t j = 0; j < 64; ++j) {
      if (!(labels[k] >> j & 1)) continue;
      if (j == 0 || j > k || !buf[j - 1].tag)
        out.push_back("entry " + std::to_string(k + 1) + " carries index " + std::to_string(j) +
                      " which is not an older unresolved branch");
    }
  return out;
}

}  // namespace hsc
