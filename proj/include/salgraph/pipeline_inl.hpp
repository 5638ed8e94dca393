#ifndef SALGRAPH_PIPELINE_INL_HPP_
#define SALGRAPH_PIPELINE_INL_HPP_

#include <exception>
#include <string>

#include "salgraph/error.hpp"

namespace salgraph {

template <typename Fn>
auto run_stage(const std::string& stage, Fn&& fn) -> decltype(fn()) {
  const std::string tag = "[" + stage + "] ";
  auto tagged = [&](const std::exception& e) {
    const std::string msg = e.what();
    return msg.rfind("[", 0) == 0 ? msg : tag + msg;
  };
  try {
    return fn();
  } catch (const ConfigError& e) {
    throw ConfigError(tagged(e));
  } catch (const DataError& e) {
    throw DataError(tagged(e));
  } catch (const RuntimeFailure& e) {
    throw RuntimeFailure(tagged(e));
  } catch (const std::exception& e) {
    throw RuntimeFailure(tagged(e));
  }
}

}  // namespace salgraph

#endif  // SALGRAPH_PIPELINE_INL_HPP_
