#include "weakdesc/providers.hpp"

namespace weakdesc {

template class Dcss<DescriptorTable>;
template class Dcss<AllocatingTable>;
template class Kcas<DescriptorTable>;
template class Kcas<AllocatingTable>;

}  // namespace weakdesc
