double myTable[130][130], myTableOut[130][130];

#pragma hmpp _instr_for_ol_13_main codelet, target = CUDA, args[myTableOut].io=in, &
#pragma hmpp & args[myTable, diffsum_reduced].io=inout, args[diffsum_reduced].size=1, &
#pragma hmpp & args[*].transfer=auto
void _instr_for_ol_13_main(int i, int j, double myTableOut[130][130], double myTable[130][130], double *diffsum_reduced)
{
    double diffsum = *diffsum_reduced;
    #pragma hmppcg gridify(1, j), reduce(+:diffsum)
    for (i = 1; i < (1 + 128 + 1) - 1; i++) {
        for (j = 1; j < (1 + 128 + 1) - 1; j++) {
            double diff = myTableOut[i][j] - myTable[i][j];
            double diffmul = diff * diff;
            diffsum += diffmul;
            myTable[i][j] = myTableOut[i][j];
        }
    }
    *diffsum_reduced = diffsum;
}

int main()
{
    int i, j;
    double diffsum = 0.0;
    for (i = 0; i < 130; i++) {
        for (j = 0; j < 130; j++) {
            myTable[i][j] = (i * 7 + j * 3) % 11;
            myTableOut[i][j] = (i + j * 5) % 13;
        }
    }
    #pragma hmpp _instr_for_ol_13_main callsite
    _instr_for_ol_13_main(i, j, myTableOut, myTable, &diffsum);
    printf("%.17g %.17g\n", diffsum, myTable[5][7]);
    return 0;
}
