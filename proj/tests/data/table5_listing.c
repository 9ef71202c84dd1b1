double myTable[5002][5002], myTableOut[5002][5002];

int main()
{
#pragma hmpc <group0_12> group, target=CUDA
#pragma hmpc <group0_12> mapbyname, myTable,myTableOut
    int index = 0;
    double theDiffNorm = 1;
    double RefDiffNorm = 0;
    int iterations = 99;
    int worksize = (1 + 5000 + 1), linesize = (1 + 5000 + 1);
    int i, j, o, a;
    double diffsum, diff, diffmul;
    init(myTable, myTableOut);
#pragma hmpc <group0_12> _instr_for12_ol_12_main advancedload, args[myTable, myTableOut], args[myTable].addr="myTable", &
#pragma hmpc & args[myTableOut].addr="myTableOut"
    for (index = 0; (index < iterations); index++) {
#pragma hmpc <group0_12> _instr_for12_ol_12_main callsite, args[myTable, myTableOut].noupdate=true
        _instr_for12_ol_12_main(i, j, myTable, myTableOut);
        theDiffNorm = 0.0;
        diffsum = theDiffNorm;
#pragma hmpc <group0_12> _instr_for12_ol_17_main callsite, args[myTableOut, myTable].noupdate=true
        _instr_for12_ol_17_main(i, j, diff, myTableOut, myTable, diffmul, &diffsum, a);
#pragma hmpc <group0_12> _instr_for12_ol_17_main delegatstore, args[diffsum_reduced], args[diffsum_reduced].addr="&diffsum"
        theDiffNorm = diffsum;
    }
#pragma hmpc <group0_12> _instr_for12_ol_17_main delegatedstore, args[myTable], args[myTable].addr="myTable"
    displayRegion(myTable);
#pragma hmpc <group0_12> release
    printf("theDiffNorm:%.12g RefDiffNorm:%.12g", theDiffNorm, RefDiffNorm);
    return 0;
}
