#include "llvm/IR/Module.h"

using namespace llvm;

static bool isDeviceGlobalVariable(const GlobalVariable &GV) { return GV.hasAttribute("sycl-device-global-size"); }

bool hasDeviceImageScopeProperty(const GlobalVariable &GV) {
  if (!GV.hasAttribute("sycl-device-image-scope"))
    return false;
  return true;
}

DeviceGlobalPropertyMapTy collectDeviceGlobalProperties(const Module &M) {
  DeviceGlobalPropertyMapTy DGM;
  auto DevGlobalNum = count_if(M.globals(), isDeviceGlobalVariable);
  if (DevGlobalNum == 0)
    return DGM;

  DGM.reserve(DevGlobalNum);

  for (auto &GV : M.globals()) {
    if (!isDeviceGlobalVariable(GV))
      continue;

    DGM[getGlobalVariableUniqueId(GV)] = {
        {{getUnderlyingTypeSize(GV), hasDeviceImageScopeProperty(GV)}}};
  }

  return DGM;
}
