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
