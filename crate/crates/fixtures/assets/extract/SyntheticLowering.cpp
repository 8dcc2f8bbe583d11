// Synthetic lowering pass used by the extraction tests.
#include <vector>

using namespace llvm;

static int Count = 0;

void collectStep00(Function &F) {
  Count += 0;
  Count += 1;
  // closing } inside a comment 2
  errs() << "brace { in string 3";
  errs() << "brace { in string 4";
}

void lowerStep01(Function &F) {
  Count += 0;
  Count += 1;
}

void rewriteStep02(Function &F) {
  if (Count > 0) { Count -= 1; }
  // closing } inside a comment 1
}

void visitStep03(Function &F) {
  if (Count > 0) { Count -= 1; }
}

void emitStep04(Function &F) {

}

void collectStep05(Function &F) {
  errs() << "brace { in string 0";
  if (Count > 1) { Count -= 1; }
  if (Count > 2) { Count -= 1; }
  errs() << "brace { in string 3";
  if (Count > 4) { Count -= 1; }
}

static bool
lowerStep06(Module &M,
    int Depth) {
  if (Count > 0) { Count -= 1; }
  Count += 1;
}

void rewriteStep07(Function &F) {
  Count += 0;
}

void visitStep08(Function &F) {
  // closing } inside a comment 0
  errs() << "brace { in string 1";
  if (Count > 2) { Count -= 1; }
  Count += 3;
}

namespace detail {

int emitStep09(const Value *V) {
  errs() << "brace { in string 0";
  errs() << "brace { in string 1";
  // closing } inside a comment 2
  if (Count > 3) { Count -= 1; }
  // closing } inside a comment 4
}

int collectStep10(const Value *V) {
  errs() << "brace { in string 0";
  // closing } inside a comment 1
}

int lowerStep11(const Value *V) {
  errs() << "brace { in string 0";
  if (Count > 1) { Count -= 1; }
  // closing } inside a comment 2
  Count += 3;
  if (Count > 4) { Count -= 1; }
}

int rewriteStep12(const Value *V) {

}

int visitStep13(const Value *V) {
  if (Count > 0) { Count -= 1; }
  if (Count > 1) { Count -= 1; }
}

int emitStep14(const Value *V) {
  errs() << "brace { in string 0";
  Count += 1;
}

} // namespace detail

class StepRunner {
public:
  void run();
};

void StepRunner::collectStep15(Instruction &I) {
  Count += 0;
}

void StepRunner::lowerStep16(Instruction &I) {
  if (Count > 0) { Count -= 1; }
}

void StepRunner::rewriteStep17(Instruction &I) {
  errs() << "brace { in string 0";
  // closing } inside a comment 1
}

void StepRunner::visitStep18(Instruction &I) {
  // closing } inside a comment 0
}

void StepRunner::emitStep19(Instruction &I) {
  if (Count > 0) { Count -= 1; }
  errs() << "brace { in string 1";
  Count += 2;
  Count += 3;
  errs() << "brace { in string 4";
}

void StepRunner::collectStep20(Instruction &I) {
  Count += 0;
  errs() << "brace { in string 1";
  Count += 2;
}

template <typename T>
T lowerStep21(T Value) {
  errs() << "brace { in string 0";
  Count += 1;
}

template <typename T>
T rewriteStep22(T Value) {
  if (Count > 0) { Count -= 1; }
  Count += 1;
  errs() << "brace { in string 2";
}

template <typename T>
T visitStep23(T Value) {
  errs() << "brace { in string 0";
  Count += 1;
  // closing } inside a comment 2
  if (Count > 3) { Count -= 1; }
}

template <typename T>
T emitStep24(T Value) {
  errs() << "brace { in string 0";
  errs() << "brace { in string 1";
  errs() << "brace { in string 2";
  Count += 3;
}

template <typename T>
T collectStep25(T Value) {
  Count += 0;
}

template <typename T>
T lowerStep26(T Value) {
  errs() << "brace { in string 0";
  errs() << "brace { in string 1";
  if (Count > 2) { Count -= 1; }
  if (Count > 3) { Count -= 1; }
  if (Count > 4) { Count -= 1; }
}
