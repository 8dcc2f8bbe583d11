// Partition pass stand-in: one trivial function per scripted outcome.

int keepCase000(int Value) {
  Value += 0;
  return Value;
}

int keepCase001(int Value) {
  Value += 1;
  return Value;
}

int keepCase002(int Value) {
  Value += 2;
  return Value;
}

int keepCase003(int Value) {
  Value += 3;
  return Value;
}

int keepCase004(int Value) {
  Value += 4;
  return Value;
}

int keepCase005(int Value) {
  Value += 5;
  return Value;
}

int keepCase006(int Value) {
  Value += 6;
  return Value;
}

int keepCase007(int Value) {
  Value += 7;
  return Value;
}

int keepCase008(int Value) {
  Value += 8;
  return Value;
}

int keepCase009(int Value) {
  Value += 9;
  return Value;
}

int keepCase010(int Value) {
  Value += 10;
  return Value;
}

int keepCase011(int Value) {
  Value += 11;
  return Value;
}

int keepCase012(int Value) {
  Value += 12;
  return Value;
}

int keepCase013(int Value) {
  Value += 13;
  return Value;
}

int keepCase014(int Value) {
  Value += 14;
  return Value;
}

int keepCase015(int Value) {
  Value += 15;
  return Value;
}

int keepCase016(int Value) {
  Value += 16;
  return Value;
}

int keepCase017(int Value) {
  Value += 17;
  return Value;
}

int keepCase018(int Value) {
  Value += 18;
  return Value;
}

int dropCase000(int Value) {
  Value -= 0;
  return Value;
}

int dropCase001(int Value) {
  Value -= 1;
  return Value;
}

int dropCase002(int Value) {
  Value -= 2;
  return Value;
}

int dropCase003(int Value) {
  Value -= 3;
  return Value;
}

int dropCase004(int Value) {
  Value -= 4;
  return Value;
}

int dropCase005(int Value) {
  Value -= 5;
  return Value;
}

int dropCase006(int Value) {
  Value -= 6;
  return Value;
}

int dropCase007(int Value) {
  Value -= 7;
  return Value;
}

int dropCase008(int Value) {
  Value -= 8;
  return Value;
}

int dropCase009(int Value) {
  Value -= 9;
  return Value;
}

int dropCase010(int Value) {
  Value -= 10;
  return Value;
}

int dropCase011(int Value) {
  Value -= 11;
  return Value;
}

int dropCase012(int Value) {
  Value -= 12;
  return Value;
}

int dropCase013(int Value) {
  Value -= 13;
  return Value;
}

int dropCase014(int Value) {
  Value -= 14;
  return Value;
}

int dropCase015(int Value) {
  Value -= 15;
  return Value;
}

int dropCase016(int Value) {
  Value -= 16;
  return Value;
}

int dropCase017(int Value) {
  Value -= 17;
  return Value;
}

int dropCase018(int Value) {
  Value -= 18;
  return Value;
}

int dropCase019(int Value) {
  Value -= 19;
  return Value;
}

int dropCase020(int Value) {
  Value -= 20;
  return Value;
}

int dropCase021(int Value) {
  Value -= 21;
  return Value;
}

int dropCase022(int Value) {
  Value -= 22;
  return Value;
}

int dropCase023(int Value) {
  Value -= 23;
  return Value;
}

int dropCase024(int Value) {
  Value -= 24;
  return Value;
}

int dropCase025(int Value) {
  Value -= 25;
  return Value;
}

int dropCase026(int Value) {
  Value -= 26;
  return Value;
}

int dropCase027(int Value) {
  Value -= 27;
  return Value;
}

int dropCase028(int Value) {
  Value -= 28;
  return Value;
}

int dropCase029(int Value) {
  Value -= 29;
  return Value;
}

int dropCase030(int Value) {
  Value -= 30;
  return Value;
}

int dropCase031(int Value) {
  Value -= 31;
  return Value;
}

int dropCase032(int Value) {
  Value -= 32;
  return Value;
}

int dropCase033(int Value) {
  Value -= 33;
  return Value;
}

int dropCase034(int Value) {
  Value -= 34;
  return Value;
}

int dropCase035(int Value) {
  Value -= 35;
  return Value;
}

int dropCase036(int Value) {
  Value -= 36;
  return Value;
}

int dropCase037(int Value) {
  Value -= 37;
  return Value;
}

int dropCase038(int Value) {
  Value -= 38;
  return Value;
}

int dropCase039(int Value) {
  Value -= 39;
  return Value;
}

int dropCase040(int Value) {
  Value -= 40;
  return Value;
}

int dropCase041(int Value) {
  Value -= 41;
  return Value;
}

int dropCase042(int Value) {
  Value -= 42;
  return Value;
}

int dropCase043(int Value) {
  Value -= 43;
  return Value;
}

int dropCase044(int Value) {
  Value -= 44;
  return Value;
}

int dropCase045(int Value) {
  Value -= 45;
  return Value;
}

int dropCase046(int Value) {
  Value -= 46;
  return Value;
}

int dropCase047(int Value) {
  Value -= 47;
  return Value;
}

int dropCase048(int Value) {
  Value -= 48;
  return Value;
}

int dropCase049(int Value) {
  Value -= 49;
  return Value;
}

int dropCase050(int Value) {
  Value -= 50;
  return Value;
}

int dropCase051(int Value) {
  Value -= 51;
  return Value;
}

int dropCase052(int Value) {
  Value -= 52;
  return Value;
}

int dropCase053(int Value) {
  Value -= 53;
  return Value;
}

int dropCase054(int Value) {
  Value -= 54;
  return Value;
}

int dropCase055(int Value) {
  Value -= 55;
  return Value;
}

int dropCase056(int Value) {
  Value -= 56;
  return Value;
}

int dropCase057(int Value) {
  Value -= 57;
  return Value;
}

int dropCase058(int Value) {
  Value -= 58;
  return Value;
}

int dropCase059(int Value) {
  Value -= 59;
  return Value;
}

int dropCase060(int Value) {
  Value -= 60;
  return Value;
}

int dropCase061(int Value) {
  Value -= 61;
  return Value;
}

int dropCase062(int Value) {
  Value -= 62;
  return Value;
}

int dropCase063(int Value) {
  Value -= 63;
  return Value;
}

int dropCase064(int Value) {
  Value -= 64;
  return Value;
}

int dropCase065(int Value) {
  Value -= 65;
  return Value;
}

int dropCase066(int Value) {
  Value -= 66;
  return Value;
}

int dropCase067(int Value) {
  Value -= 67;
  return Value;
}

int dropCase068(int Value) {
  Value -= 68;
  return Value;
}

int dropCase069(int Value) {
  Value -= 69;
  return Value;
}

int dropCase070(int Value) {
  Value -= 70;
  return Value;
}

int dropCase071(int Value) {
  Value -= 71;
  return Value;
}

int dropCase072(int Value) {
  Value -= 72;
  return Value;
}

int dropCase073(int Value) {
  Value -= 73;
  return Value;
}

int dropCase074(int Value) {
  Value -= 74;
  return Value;
}

int dropCase075(int Value) {
  Value -= 75;
  return Value;
}

int dropCase076(int Value) {
  Value -= 76;
  return Value;
}

int dropCase077(int Value) {
  Value -= 77;
  return Value;
}

int dropCase078(int Value) {
  Value -= 78;
  return Value;
}

int dropCase079(int Value) {
  Value -= 79;
  return Value;
}

int dropCase080(int Value) {
  Value -= 80;
  return Value;
}

int dropCase081(int Value) {
  Value -= 81;
  return Value;
}

int dropCase082(int Value) {
  Value -= 82;
  return Value;
}

int dropCase083(int Value) {
  Value -= 83;
  return Value;
}

int dropCase084(int Value) {
  Value -= 84;
  return Value;
}

int dropCase085(int Value) {
  Value -= 85;
  return Value;
}

int dropCase086(int Value) {
  Value -= 86;
  return Value;
}

int dropCase087(int Value) {
  Value -= 87;
  return Value;
}

int dropCase088(int Value) {
  Value -= 88;
  return Value;
}

int dropCase089(int Value) {
  Value -= 89;
  return Value;
}

int dropCase090(int Value) {
  Value -= 90;
  return Value;
}

int dropCase091(int Value) {
  Value -= 91;
  return Value;
}

int dropCase092(int Value) {
  Value -= 92;
  return Value;
}

int dropCase093(int Value) {
  Value -= 93;
  return Value;
}

int dropCase094(int Value) {
  Value -= 94;
  return Value;
}

int dropCase095(int Value) {
  Value -= 95;
  return Value;
}

int dropCase096(int Value) {
  Value -= 96;
  return Value;
}

int dropCase097(int Value) {
  Value -= 97;
  return Value;
}

int dropCase098(int Value) {
  Value -= 98;
  return Value;
}

int dropCase099(int Value) {
  Value -= 99;
  return Value;
}

int dropCase100(int Value) {
  Value -= 100;
  return Value;
}

int dropCase101(int Value) {
  Value -= 101;
  return Value;
}

int dropCase102(int Value) {
  Value -= 102;
  return Value;
}

int dropCase103(int Value) {
  Value -= 103;
  return Value;
}

int dropCase104(int Value) {
  Value -= 104;
  return Value;
}

int dropCase105(int Value) {
  Value -= 105;
  return Value;
}

int dropCase106(int Value) {
  Value -= 106;
  return Value;
}

int dropCase107(int Value) {
  Value -= 107;
  return Value;
}

int dropCase108(int Value) {
  Value -= 108;
  return Value;
}

int dropCase109(int Value) {
  Value -= 109;
  return Value;
}

int dropCase110(int Value) {
  Value -= 110;
  return Value;
}

int dropCase111(int Value) {
  Value -= 111;
  return Value;
}

int dropCase112(int Value) {
  Value -= 112;
  return Value;
}

int dropCase113(int Value) {
  Value -= 113;
  return Value;
}

int dropCase114(int Value) {
  Value -= 114;
  return Value;
}

int dropCase115(int Value) {
  Value -= 115;
  return Value;
}

int dropCase116(int Value) {
  Value -= 116;
  return Value;
}
